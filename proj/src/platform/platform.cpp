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

#include "ivim/platform.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace ivim {

namespace {

struct WorkloadRef {
    CcpState* ccp = nullptr;
    VmState* vm = nullptr;
    WorkloadState* workload = nullptr;
};

std::optional<WorkloadRef> find_workload(PlatformState& state, std::string_view app_id, int replica) {
    for (auto& ccp : state.ccps) {
        for (auto& vm : ccp.vms) {
            for (auto& w : vm.workloads) {
                if (w.app_id == app_id && w.replica_index == replica) {
                    return WorkloadRef{&ccp, &vm, &w};
                }
            }
        }
    }
    return std::nullopt;
}

template <typename Fn>
void for_each_replica(PlatformState& state, std::string_view app_id, Fn&& fn) {
    for (auto& ccp : state.ccps) {
        for (auto& vm : ccp.vms) {
            for (auto& w : vm.workloads) {
                if (w.app_id == app_id) {
                    fn(vm, w);
                }
            }
        }
    }
}

ActionOutcome fail(FailureReason reason, std::string detail) {
    return {reason, std::move(detail)};
}

ActionOutcome ensure_vm_running(PlatformState& state, const DeploymentAction& a) {
    auto [ccp, vm] = state.find_vm(a.vm_id);
    if (vm == nullptr) {
        return fail(FailureReason::kNotFound, "no VM " + a.vm_id);
    }
    if (!ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ccp->id + " is down");
    }
    vm->phase = VmPhase::kRunning;
    return {};
}

ActionOutcome stop_vm(PlatformState& state, const DeploymentAction& a) {
    auto [ccp, vm] = state.find_vm(a.vm_id);
    if (vm == nullptr) {
        return fail(FailureReason::kNotFound, "no VM " + a.vm_id);
    }
    if (!ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ccp->id + " is down");
    }
    if (!vm->workloads.empty()) {
        return fail(FailureReason::kConflict, "VM " + a.vm_id + " still hosts workloads");
    }
    vm->phase = VmPhase::kStopped;
    return {};
}

ActionOutcome pull_image(PlatformState& state, const DeploymentAction& a) {
    auto* ccp = state.find_ccp(a.ccp_id);
    if (ccp == nullptr) {
        return fail(FailureReason::kNotFound, "no CCP " + a.ccp_id);
    }
    if (!ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ccp->id + " is down");
    }
    if (!state.registry.contains(a.image_ref)) {
        return fail(FailureReason::kImageNotFound, a.image_ref + " not in registry");
    }
    ccp->image_cache.insert(a.image_ref);
    return {};
}

ActionOutcome start_workload(PlatformState& state, const DeploymentAction& a) {
    auto [ccp, vm] = state.find_vm(a.vm_id);
    if (vm == nullptr) {
        return fail(FailureReason::kNotFound, "no VM " + a.vm_id);
    }
    if (!ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ccp->id + " is down");
    }
    if (vm->phase != VmPhase::kRunning) {
        return fail(FailureReason::kVmNotRunning, "VM " + a.vm_id + " is stopped");
    }
    if (find_workload(state, a.app_id, a.replica_index)) {
        return fail(FailureReason::kConflict, a.app_id + "[" + std::to_string(a.replica_index) + "] already deployed");
    }
    if (!ccp->image_cache.contains(a.image_ref)) {
        if (!state.registry.contains(a.image_ref)) {
            return fail(FailureReason::kImageNotFound, a.image_ref + " neither cached on " + ccp->id + " nor in registry");
        }
        ccp->image_cache.insert(a.image_ref);
    }
    ResourceVector used = a.demand;
    for (const auto& w : vm->workloads) {
        used += w.demand;
    }
    if (used.cpu_millicores > vm->capacity.cpu_millicores || used.ram_mb > vm->capacity.ram_mb) {
        return fail(FailureReason::kCapacityExceeded, "VM " + a.vm_id + " cannot fit " + a.app_id);
    }
    if (a.active) {
        bool other_active = false;
        for_each_replica(state, a.app_id, [&](VmState&, WorkloadState& w) { other_active |= w.active; });
        if (other_active) {
            return fail(FailureReason::kConflict, a.app_id + " already has an active replica");
        }
    }
    vm->workloads.push_back({a.app_id, a.replica_index, a.image_ref, a.demand, WorkloadPhase::kRunning, a.active});
    return {};
}

ActionOutcome stop_workload(PlatformState& state, const DeploymentAction& a) {
    auto [ccp, vm] = state.find_vm(a.vm_id);
    if (vm == nullptr) {
        return fail(FailureReason::kNotFound, "no VM " + a.vm_id);
    }
    if (!ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ccp->id + " is down");
    }
    auto it = std::find_if(vm->workloads.begin(), vm->workloads.end(), [&](const WorkloadState& w) {
        return w.app_id == a.app_id && w.replica_index == a.replica_index;
    });
    if (it == vm->workloads.end()) {
        return fail(FailureReason::kNotFound, a.app_id + " not on " + a.vm_id);
    }
    vm->workloads.erase(it);
    return {};
}

ActionOutcome promote_active(PlatformState& state, const DeploymentAction& a) {
    auto ref = find_workload(state, a.app_id, a.replica_index);
    if (!ref || ref->vm->vm_id != a.vm_id) {
        return fail(FailureReason::kNotFound, a.app_id + " not on " + a.vm_id);
    }
    if (!ref->ccp->alive) {
        return fail(FailureReason::kDeadCcp, "CCP " + ref->ccp->id + " is down");
    }
    if (!a.active) {
        ref->workload->active = false;
        return {};
    }
    if (ref->workload->phase == WorkloadPhase::kFailed) {
        return fail(FailureReason::kConflict, "cannot activate failed replica of " + a.app_id);
    }
    for_each_replica(state, a.app_id, [](VmState&, WorkloadState& w) { w.active = false; });
    ref->workload->active = true;
    return {};
}

} // namespace

std::string_view to_string(VmPhase phase) {
    return phase == VmPhase::kRunning ? "running" : "stopped";
}

std::string_view to_string(WorkloadPhase phase) {
    switch (phase) {
    case WorkloadPhase::kPending:
        return "pending";
    case WorkloadPhase::kRunning:
        return "running";
    case WorkloadPhase::kFailed:
        return "failed";
    }
    return "failed";
}

std::string_view to_string(FailureReason reason) {
    switch (reason) {
    case FailureReason::kNone:
        return "ok";
    case FailureReason::kImageNotFound:
        return "ImageNotFound";
    case FailureReason::kVmNotRunning:
        return "VmNotRunning";
    case FailureReason::kCapacityExceeded:
        return "CapacityExceeded";
    case FailureReason::kDeadCcp:
        return "DeadCcp";
    case FailureReason::kNotFound:
        return "NotFound";
    case FailureReason::kConflict:
        return "Conflict";
    }
    return "Unknown";
}

CcpState* PlatformState::find_ccp(std::string_view id) {
    for (auto& ccp : ccps) {
        if (ccp.id == id) {
            return &ccp;
        }
    }
    return nullptr;
}

const CcpState* PlatformState::find_ccp(std::string_view id) const {
    return const_cast<PlatformState*>(this)->find_ccp(id);
}

std::pair<CcpState*, VmState*> PlatformState::find_vm(std::string_view vm_id) {
    for (auto& ccp : ccps) {
        for (auto& vm : ccp.vms) {
            if (vm.vm_id == vm_id) {
                return {&ccp, &vm};
            }
        }
    }
    return {nullptr, nullptr};
}

std::pair<const CcpState*, const VmState*> PlatformState::find_vm(std::string_view vm_id) const {
    auto [ccp, vm] = const_cast<PlatformState*>(this)->find_vm(vm_id);
    return {ccp, vm};
}

bool ApplyReport::all_ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const ActionOutcome& o) { return o.ok(); });
}

PlatformState init_platform(const InstanceModel& topology) {
    PlatformState state;
    for (const auto& ccp : topology.ccps) {
        CcpState c;
        c.id = ccp.id;
        for (const auto& vm : ccp.vms) {
            c.vms.push_back({vm.id, vm.role, vm.capacity,
                             vm.role == VmRole::kService ? VmPhase::kRunning : VmPhase::kStopped, {}});
        }
        state.ccps.push_back(std::move(c));
    }
    for (const auto& app : topology.applications) {
        state.registry.insert(app.image_ref);
    }
    return state;
}

std::pair<PlatformState, ApplyReport> apply(const ActionPlan& plan, PlatformState state) {
    ApplyReport report;
    report.outcomes.reserve(plan.actions.size());
    for (const auto& action : plan.actions) {
        ActionOutcome outcome;
        switch (action.kind) {
        case ActionKind::kEnsureVmRunning:
            outcome = ensure_vm_running(state, action);
            break;
        case ActionKind::kStopVm:
            outcome = stop_vm(state, action);
            break;
        case ActionKind::kPullImage:
            outcome = pull_image(state, action);
            break;
        case ActionKind::kStartWorkload:
            outcome = start_workload(state, action);
            break;
        case ActionKind::kStopWorkload:
            outcome = stop_workload(state, action);
            break;
        case ActionKind::kPromoteActive:
            outcome = promote_active(state, action);
            break;
        }
        report.outcomes.push_back(std::move(outcome));
    }
    report.final_state_digest = state_digest(state);
    return {std::move(state), std::move(report)};
}

PlatformState tick(PlatformState state) {
    ++state.clock;
    for (auto& ccp : state.ccps) {
        if (ccp.alive) {
            continue;
        }
        for (auto& vm : ccp.vms) {
            for (auto& w : vm.workloads) {
                w.phase = WorkloadPhase::kFailed;
            }
        }
    }

    std::map<std::string, std::vector<std::pair<VmState*, WorkloadState*>>> replicas;
    for (auto& ccp : state.ccps) {
        for (auto& vm : ccp.vms) {
            for (auto& w : vm.workloads) {
                replicas[w.app_id].emplace_back(&vm, &w);
            }
        }
    }
    for (auto& [app_id, list] : replicas) {
        auto active = std::find_if(list.begin(), list.end(), [](const auto& p) { return p.second->active; });
        if (active == list.end() || active->second->phase != WorkloadPhase::kFailed) {
            continue;
        }
        std::pair<VmState*, WorkloadState*> standby{nullptr, nullptr};
        for (const auto& p : list) {
            if (p.second->phase == WorkloadPhase::kFailed) {
                continue;
            }
            if (standby.first == nullptr ||
                std::tie(p.first->vm_id, p.second->replica_index) <
                    std::tie(standby.first->vm_id, standby.second->replica_index)) {
                standby = p;
            }
        }
        if (standby.second != nullptr) {
            active->second->active = false;
            standby.second->active = true;
        }
    }
    return state;
}

PlatformState inject_failure(PlatformState state, std::string_view ccp_id) {
    auto* ccp = state.find_ccp(ccp_id);
    if (ccp == nullptr) {
        throw UnknownCcp("unknown CCP '" + std::string(ccp_id) + "'");
    }
    ccp->alive = false;
    return state;
}

PlatformState publish_images(PlatformState state, std::span<const std::string> image_refs) {
    state.registry.insert(image_refs.begin(), image_refs.end());
    return state;
}

std::size_t running_workload_count(const PlatformState& state) {
    std::size_t n = 0;
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            for (const auto& w : vm.workloads) {
                n += w.phase == WorkloadPhase::kRunning ? 1 : 0;
            }
        }
    }
    return n;
}

std::vector<std::string> check_invariants(const PlatformState& state) {
    std::vector<std::string> problems;
    std::map<std::string, int> active;
    std::set<std::pair<std::string, int>> seen;
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            ResourceVector used;
            for (const auto& w : vm.workloads) {
                used += w.demand;
                if (w.active) {
                    ++active[w.app_id];
                }
                if (!seen.emplace(w.app_id, w.replica_index).second) {
                    problems.push_back("duplicate workload " + w.app_id + "[" + std::to_string(w.replica_index) + "]");
                }
            }
            if (used.cpu_millicores > vm.capacity.cpu_millicores || used.ram_mb > vm.capacity.ram_mb) {
                problems.push_back("VM " + vm.vm_id + " over capacity");
            }
            if (!vm.workloads.empty() && vm.phase != VmPhase::kRunning) {
                problems.push_back("VM " + vm.vm_id + " hosts workloads while stopped");
            }
        }
    }
    for (const auto& [app, count] : active) {
        if (count > 1) {
            problems.push_back(std::to_string(count) + " active replicas of " + app);
        }
    }
    return problems;
}

} // namespace ivim
