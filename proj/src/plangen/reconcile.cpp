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
#include <map>
#include <set>
#include <tuple>

#include "ivim/plangen.hpp"

namespace ivim {

namespace {

using WorkloadKey = std::pair<std::string, int>;

struct CurrentWorkload {
    const CcpState* ccp = nullptr;
    const VmState* vm = nullptr;
    const WorkloadState* workload = nullptr;
};

std::map<WorkloadKey, CurrentWorkload> index_current(const PlatformState& state) {
    std::map<WorkloadKey, CurrentWorkload> out;
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            for (const auto& w : vm.workloads) {
                out.emplace(WorkloadKey{w.app_id, w.replica_index}, CurrentWorkload{&ccp, &vm, &w});
            }
        }
    }
    return out;
}

bool unchanged_placement(const CurrentWorkload& current, const DesiredWorkload& desired) {
    return current.workload->phase == WorkloadPhase::kRunning && current.vm->vm_id == desired.vm_id &&
           current.workload->image_ref == desired.image_ref && current.workload->demand == desired.demand;
}

} // namespace

ActionPlan reconcile(const DesiredState& desired, const PlatformState& current) {
    for (const auto& vm : desired.vms) {
        if (current.find_vm(vm.vm_id).second == nullptr) {
            throw UnknownTopology("desired VM '" + vm.vm_id + "' does not exist on the platform");
        }
    }
    for (const auto& w : desired.workloads) {
        if (current.find_vm(w.vm_id).second == nullptr) {
            throw UnknownTopology("workload " + w.app_id + " targets unknown VM '" + w.vm_id + "'");
        }
    }

    const auto existing = index_current(current);
    std::map<WorkloadKey, const DesiredWorkload*> wanted;
    for (const auto& w : desired.workloads) {
        wanted.emplace(WorkloadKey{w.app_id, w.replica_index}, &w);
    }

    std::set<WorkloadKey> kept;
    std::set<std::string> apps_with_kept_active;
    std::set<std::string> apps_with_desired_active;
    for (const auto& [key, w] : wanted) {
        if (w->active) {
            apps_with_desired_active.insert(key.first);
        }
        auto it = existing.find(key);
        if (it != existing.end() && unchanged_placement(it->second, *w)) {
            kept.insert(key);
            if (it->second.workload->active) {
                apps_with_kept_active.insert(key.first);
            }
        }
    }

    std::vector<DeploymentAction> stops, vm_stops, vm_starts, pulls, starts, promotions;

    for (const auto& [key, cur] : existing) {
        if (!kept.contains(key)) {
            DeploymentAction a;
            a.kind = ActionKind::kStopWorkload;
            a.vm_id = cur.vm->vm_id;
            a.app_id = key.first;
            a.replica_index = key.second;
            stops.push_back(std::move(a));
        }
    }

    for (const auto& vm : desired.vms) {
        auto [ccp, state] = current.find_vm(vm.vm_id);
        const bool running = state->phase == VmPhase::kRunning;
        if (vm.running != running) {
            DeploymentAction a;
            a.kind = vm.running ? ActionKind::kEnsureVmRunning : ActionKind::kStopVm;
            a.ccp_id = ccp->id;
            a.vm_id = vm.vm_id;
            (vm.running ? vm_starts : vm_stops).push_back(std::move(a));
        }
    }

    std::set<std::pair<std::string, std::string>> needed_images;  // (ccp, image)
    for (const auto& [key, w] : wanted) {
        if (kept.contains(key)) {
            const auto* cur = existing.at(key).workload;
            const bool demote_only = cur->active && !w->active && !apps_with_desired_active.contains(key.first);
            if ((w->active && !cur->active) || demote_only) {
                DeploymentAction a;
                a.kind = ActionKind::kPromoteActive;
                a.vm_id = w->vm_id;
                a.app_id = key.first;
                a.replica_index = key.second;
                a.active = w->active;
                promotions.push_back(std::move(a));
            }
            continue;
        }
        auto [ccp, vm] = current.find_vm(w->vm_id);
        if (!ccp->image_cache.contains(w->image_ref)) {
            needed_images.emplace(ccp->id, w->image_ref);
        }
        // A kept replica that is still active must hand over explicitly so
        // the app never has two active replicas mid-plan.
        const bool start_active = w->active && !apps_with_kept_active.contains(key.first);
        DeploymentAction a;
        a.kind = ActionKind::kStartWorkload;
        a.vm_id = w->vm_id;
        a.app_id = key.first;
        a.replica_index = key.second;
        a.image_ref = w->image_ref;
        a.demand = w->demand;
        a.active = start_active;
        starts.push_back(a);
        if (w->active && !start_active) {
            a.kind = ActionKind::kPromoteActive;
            a.image_ref.clear();
            a.demand = {};
            a.active = true;
            promotions.push_back(std::move(a));
        }
    }
    for (const auto& [ccp_id, image] : needed_images) {
        DeploymentAction a;
        a.kind = ActionKind::kPullImage;
        a.ccp_id = ccp_id;
        a.image_ref = image;
        pulls.push_back(std::move(a));
    }
    std::sort(promotions.begin(), promotions.end(), [](const DeploymentAction& a, const DeploymentAction& b) {
        return std::tie(a.app_id, a.replica_index) < std::tie(b.app_id, b.replica_index);
    });

    ActionPlan plan;
    for (auto* group : {&stops, &vm_stops, &vm_starts, &pulls, &starts, &promotions}) {
        for (auto& a : *group) {
            a.ordering_index = static_cast<int>(plan.actions.size());
            plan.actions.push_back(std::move(a));
        }
    }
    return plan;
}

bool matches_desired(const PlatformState& state, const DesiredState& desired) {
    for (const auto& vm : desired.vms) {
        auto [ccp, current] = state.find_vm(vm.vm_id);
        if (current == nullptr || (current->phase == VmPhase::kRunning) != vm.running) {
            return false;
        }
    }
    const auto existing = index_current(state);
    if (existing.size() != desired.workloads.size()) {
        return false;
    }
    for (const auto& w : desired.workloads) {
        auto it = existing.find({w.app_id, w.replica_index});
        if (it == existing.end() || !unchanged_placement(it->second, w) || it->second.workload->active != w.active) {
            return false;
        }
    }
    return true;
}

nlohmann::ordered_json plan_to_json(const ActionPlan& plan) {
    nlohmann::ordered_json doc;
    doc["actions"] = nlohmann::ordered_json::array();
    for (const auto& a : plan.actions) {
        nlohmann::ordered_json entry;
        entry["index"] = a.ordering_index;
        entry["kind"] = to_string(a.kind);
        switch (a.kind) {
        case ActionKind::kEnsureVmRunning:
        case ActionKind::kStopVm:
            entry["ccp"] = a.ccp_id;
            entry["vm"] = a.vm_id;
            break;
        case ActionKind::kPullImage:
            entry["ccp"] = a.ccp_id;
            entry["image"] = a.image_ref;
            break;
        case ActionKind::kStartWorkload:
            entry["app"] = a.app_id;
            entry["replica"] = a.replica_index;
            entry["vm"] = a.vm_id;
            entry["image"] = a.image_ref;
            entry["active"] = a.active;
            break;
        case ActionKind::kStopWorkload:
            entry["app"] = a.app_id;
            entry["replica"] = a.replica_index;
            entry["vm"] = a.vm_id;
            break;
        case ActionKind::kPromoteActive:
            entry["app"] = a.app_id;
            entry["replica"] = a.replica_index;
            entry["vm"] = a.vm_id;
            entry["active"] = a.active;
            break;
        }
        doc["actions"].push_back(std::move(entry));
    }
    doc["summary"] = nlohmann::ordered_json::object();
    for (const auto& [kind, count] : plan.summary()) {
        doc["summary"][std::string(to_string(kind))] = count;
    }
    return doc;
}

} // namespace ivim
