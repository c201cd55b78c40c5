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

#include <algorithm>
#include <set>

#include "ivim/plangen.hpp"
#include "ivim/verifier.hpp"

namespace ivim {

DesiredState generate_desired_state(const InstanceModel& model, const ConstraintSet& constraints) {
    if (!is_complete(model)) {
        throw IncompleteModel("instance model is incomplete; every application needs all replicas placed");
    }
    auto report = verify(model, constraints);
    if (!report.clean()) {
        throw IncompleteModel("instance model violates " + report.violations.front().constraint_id + ": " +
                              report.violations.front().message);
    }

    DesiredState desired;
    std::set<std::string> hosting;
    for (const auto& alloc : model.allocations) {
        const auto* app = model.find_app(alloc.app_id);
        desired.workloads.push_back(
            {alloc.app_id, alloc.replica_index, alloc.vm_id, app->image_ref, app->demand, alloc.active});
        hosting.insert(alloc.vm_id);
    }
    for (const auto* vm : model.vms()) {
        bool running = vm->role == VmRole::kService || hosting.contains(vm->id);
        desired.vms.push_back({vm->id, vm->ccp_id, vm->role, vm->capacity, running});
    }
    std::sort(desired.vms.begin(), desired.vms.end(),
              [](const DesiredVm& a, const DesiredVm& b) { return a.vm_id < b.vm_id; });
    std::sort(desired.workloads.begin(), desired.workloads.end(), [](const DesiredWorkload& a, const DesiredWorkload& b) {
        return std::tie(a.app_id, a.replica_index) < std::tie(b.app_id, b.replica_index);
    });
    return desired;
}

DesiredState generate_desired_state(const InstanceModel& model) {
    return generate_desired_state(model, default_catalog());
}

nlohmann::ordered_json desired_state_to_json(const DesiredState& desired) {
    nlohmann::ordered_json doc;
    doc["vms"] = nlohmann::ordered_json::array();
    for (const auto& vm : desired.vms) {
        nlohmann::ordered_json v;
        v["id"] = vm.vm_id;
        v["ccp"] = vm.ccp_id;
        v["role"] = to_string(vm.role);
        v["cpu_millicores"] = vm.capacity.cpu_millicores;
        v["ram_mb"] = vm.capacity.ram_mb;
        v["gpu_slots"] = vm.capacity.gpu_slots;
        v["running"] = vm.running;
        doc["vms"].push_back(std::move(v));
    }
    doc["workloads"] = nlohmann::ordered_json::array();
    for (const auto& w : desired.workloads) {
        nlohmann::ordered_json wj;
        wj["app"] = w.app_id;
        wj["replica"] = w.replica_index;
        wj["vm"] = w.vm_id;
        wj["image"] = w.image_ref;
        wj["cpu_millicores"] = w.demand.cpu_millicores;
        wj["ram_mb"] = w.demand.ram_mb;
        wj["gpu_slots"] = w.demand.gpu_slots;
        wj["active"] = w.active;
        doc["workloads"].push_back(std::move(wj));
    }
    return doc;
}

} // namespace ivim
