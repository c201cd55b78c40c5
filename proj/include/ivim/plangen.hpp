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

#include <string>
#include <string_view>
#include <vector>

#include "ivim/constraints.hpp"
#include "ivim/error.hpp"
#include "ivim/model.hpp"
#include "ivim/plan.hpp"
#include "ivim/platform.hpp"
#include "json.hpp"

namespace ivim {

class IncompleteModel : public Error {
public:
    using Error::Error;
};

class UnknownTopology : public Error {
public:
    using Error::Error;
};

struct DesiredVm {
    std::string vm_id;
    std::string ccp_id;
    VmRole role = VmRole::kUser;
    ResourceVector capacity;
    bool running = false;

    bool operator==(const DesiredVm&) const = default;
};

struct DesiredWorkload {
    std::string app_id;
    int replica_index = 0;
    std::string vm_id;
    std::string image_ref;
    ResourceVector demand;
    bool active = false;

    bool operator==(const DesiredWorkload&) const = default;
};

/// Declarative target: which VMs run and which workload sits where.
/// VMs are ordered by id, workloads by (app_id, replica_index).
struct DesiredState {
    std::vector<DesiredVm> vms;
    std::vector<DesiredWorkload> workloads;

    bool operator==(const DesiredState&) const = default;
};

/// Throws IncompleteModel unless the model is complete and has no violations
/// against `constraints`.
DesiredState generate_desired_state(const InstanceModel& model, const ConstraintSet& constraints);
DesiredState generate_desired_state(const InstanceModel& model);

nlohmann::ordered_json desired_state_to_json(const DesiredState& desired);

/// Minimal ordered plan that moves `current` to `desired`:
///   StopWorkload, StopVm, EnsureVmRunning, PullImage, StartWorkload, PromoteActive
/// each group sorted by its ids. Throws UnknownTopology if a desired VM does
/// not exist in `current`.
ActionPlan reconcile(const DesiredState& desired, const PlatformState& current);

/// True when every desired workload runs as specified, nothing else is
/// deployed, and VM phases match.
bool matches_desired(const PlatformState& state, const DesiredState& desired);

std::string render_plan(const ActionPlan& plan);

/// Inverse of render_plan. Throws SchemaError on lines it does not recognise.
ActionPlan parse_rendered_plan(std::string_view text);

nlohmann::ordered_json plan_to_json(const ActionPlan& plan);

} // namespace ivim
