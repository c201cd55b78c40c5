/*
 * Copyright 2026 The ivim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ivim/error.hpp"
#include "ivim/model.hpp"
#include "ivim/plan.hpp"
#include "json.hpp"

namespace ivim {

class UnknownCcp : public Error {
public:
    using Error::Error;
};

enum class VmPhase { kStopped, kRunning };
enum class WorkloadPhase { kPending, kRunning, kFailed };

std::string_view to_string(VmPhase phase);
std::string_view to_string(WorkloadPhase phase);

struct WorkloadState {
    std::string app_id;
    int replica_index = 0;
    std::string image_ref;
    ResourceVector demand;
    WorkloadPhase phase = WorkloadPhase::kRunning;
    bool active = false;

    bool operator==(const WorkloadState&) const = default;
};

struct VmState {
    std::string vm_id;
    VmRole role = VmRole::kUser;
    ResourceVector capacity;
    VmPhase phase = VmPhase::kStopped;
    std::vector<WorkloadState> workloads;

    bool operator==(const VmState&) const = default;
};

struct CcpState {
    std::string id;
    bool alive = true;
    std::set<std::string> image_cache;
    std::vector<VmState> vms;

    bool operator==(const CcpState&) const = default;
};

struct PlatformState {
    std::vector<CcpState> ccps;
    /// Images known to the registry; pulls of these always succeed.
    std::set<std::string> registry;
    std::uint64_t clock = 0;

    CcpState* find_ccp(std::string_view id);
    const CcpState* find_ccp(std::string_view id) const;
    /// The VM and the CCP that hosts it, or {nullptr, nullptr}.
    std::pair<CcpState*, VmState*> find_vm(std::string_view vm_id);
    std::pair<const CcpState*, const VmState*> find_vm(std::string_view vm_id) const;

    bool operator==(const PlatformState&) const = default;
};

/// All CCPs alive, service VMs running, user VMs stopped, caches empty.
/// The registry is seeded with the images of the topology's applications.
PlatformState init_platform(const InstanceModel& topology);

enum class FailureReason {
    kNone,
    kImageNotFound,
    kVmNotRunning,
    kCapacityExceeded,
    kDeadCcp,
    kNotFound,
    kConflict,
};

std::string_view to_string(FailureReason reason);

struct ActionOutcome {
    FailureReason reason = FailureReason::kNone;
    std::string detail;

    bool ok() const { return reason == FailureReason::kNone; }
    bool operator==(const ActionOutcome&) const = default;
};

struct ApplyReport {
    std::vector<ActionOutcome> outcomes;  // one per plan action, same order
    std::string final_state_digest;

    bool all_ok() const;
    bool operator==(const ApplyReport&) const = default;
};

/// Executes the plan in order. A failing action is recorded and skipped;
/// later actions still run and nothing is rolled back.
std::pair<PlatformState, ApplyReport> apply(const ActionPlan& plan, PlatformState state);

/// Advances the clock by one. Workloads on dead CCPs become failed, then
/// each app whose active replica failed hands over to the surviving
/// replica on the lowest VM id.
PlatformState tick(PlatformState state);

/// Marks the CCP dead. Idempotent. Throws UnknownCcp.
PlatformState inject_failure(PlatformState state, std::string_view ccp_id);

PlatformState publish_images(PlatformState state, std::span<const std::string> image_refs);

/// "sha256:<hex>" over the canonical snapshot without its digest field.
std::string state_digest(const PlatformState& state);

nlohmann::ordered_json snapshot_json(const PlatformState& state);
std::string snapshot(const PlatformState& state);

/// Inverse of snapshot(). Throws SchemaError, or IntegrityError when the
/// embedded digest does not match the content.
PlatformState parse_snapshot(std::string_view text);
PlatformState snapshot_from_json(const nlohmann::json& doc);

/// Number of workloads in phase running across the platform.
std::size_t running_workload_count(const PlatformState& state);

/// Invariant checks used by tests and the scenario runner. Empty means OK.
std::vector<std::string> check_invariants(const PlatformState& state);

} // namespace ivim
