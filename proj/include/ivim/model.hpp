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

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ivim {

/// Resource quantities in integer units: millicores, MB and GPU slots.
struct ResourceVector {
    std::int64_t cpu_millicores = 0;
    std::int64_t ram_mb = 0;
    std::int64_t gpu_slots = 0;

    ResourceVector& operator+=(const ResourceVector& other) {
        cpu_millicores += other.cpu_millicores;
        ram_mb += other.ram_mb;
        gpu_slots += other.gpu_slots;
        return *this;
    }

    friend ResourceVector operator+(ResourceVector lhs, const ResourceVector& rhs) { return lhs += rhs; }

    /// Component-wise <=. Partial order; use operator<=> for a total one.
    bool fits_within(const ResourceVector& capacity) const {
        return cpu_millicores <= capacity.cpu_millicores && ram_mb <= capacity.ram_mb &&
               gpu_slots <= capacity.gpu_slots;
    }

    bool non_negative() const { return cpu_millicores >= 0 && ram_mb >= 0 && gpu_slots >= 0; }

    auto operator<=>(const ResourceVector&) const = default;
};

enum class VmRole { kService, kUser };

std::string_view to_string(VmRole role);

struct Vm {
    std::string id;
    std::string ccp_id;
    VmRole role = VmRole::kUser;
    ResourceVector capacity;
    bool safety = false;
    bool gpu_access = false;

    bool operator==(const Vm&) const = default;
};

struct Ccp {
    std::string id;
    std::vector<Vm> vms;

    bool operator==(const Ccp&) const = default;
};

struct Application {
    std::string id;
    std::string image_ref;
    ResourceVector demand;
    bool safety = false;
    bool gpu = false;
    int redundancy = 1;

    bool operator==(const Application&) const = default;
};

struct Allocation {
    std::string app_id;
    std::string vm_id;
    int replica_index = 0;
    bool pinned = false;
    bool active = true;

    bool operator==(const Allocation&) const = default;
};

inline constexpr std::string_view kSchemaVersion = "1";

struct InstanceModel {
    std::string schema_version{kSchemaVersion};
    std::vector<Ccp> ccps;
    std::vector<Application> applications;
    std::vector<Allocation> allocations;

    const Vm* find_vm(std::string_view id) const;
    const Ccp* find_ccp(std::string_view id) const;
    const Application* find_app(std::string_view id) const;
    const Allocation* find_allocation(std::string_view app_id, int replica_index) const;

    /// All VMs across CCPs in document order.
    std::vector<const Vm*> vms() const;

    bool operator==(const InstanceModel&) const = default;
};

/// Identifiers are non-empty and drawn from [A-Za-z0-9_.-].
bool is_valid_identifier(std::string_view id);

InstanceModel parse_instance_model(std::string_view text);
InstanceModel instance_model_from_json(const nlohmann::json& doc);

nlohmann::ordered_json instance_model_to_json(const InstanceModel& model);

/// Canonical form: fixed key order, two-space indentation, trailing newline.
std::string serialize_instance_model(const InstanceModel& model);

/// Throws IntegrityError on duplicate ids, dangling references or broken
/// replica/active bookkeeping. Called by the parser and by merge.
void check_integrity(const InstanceModel& model);

/// True iff every application has `redundancy` allocations and, for
/// redundant applications, exactly one of them is active.
bool is_complete(const InstanceModel& model);

/// Returns a copy of `model` with `additions` appended. Throws
/// IntegrityError on (app, replica) collisions or unknown ids.
InstanceModel merge_allocations(const InstanceModel& model, std::span<const Allocation> additions);

} // namespace ivim
