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

#include "ivim/solver.hpp"

namespace ivim {

namespace {

bool vm_allowed(const AssignmentProblem& problem, const Slot& slot, const Vm& vm) {
    if (vm.role == VmRole::kService) {
        return false;
    }
    for (const auto& c : problem.constraints) {
        switch (c.kind) {
        case ConstraintKind::kSafetySegregation:
            if (slot.safety != vm.safety) {
                return false;
            }
            break;
        case ConstraintKind::kGpuAffinity:
            if (slot.gpu && !vm.gpu_access) {
                return false;
            }
            break;
        case ConstraintKind::kRequireVm:
            if (c.params.at("app_id") == slot.app_id && c.params.at("vm_id") != vm.id) {
                return false;
            }
            break;
        case ConstraintKind::kForbidVm:
            if (c.params.at("app_id") == slot.app_id && c.params.at("vm_id") == vm.id) {
                return false;
            }
            break;
        default:
            break;
        }
    }
    return true;
}

// Recomputes domains, capacity rows and redundancy groups from slots, VMs,
// pins and the constraint list.
void derive(AssignmentProblem& problem) {
    const auto slot_count = problem.slots.size();
    problem.domains.assign(slot_count, {});
    for (std::size_t s = 0; s < slot_count; ++s) {
        auto pin = problem.pinned.find(static_cast<int>(s));
        for (std::size_t v = 0; v < problem.vms.size(); ++v) {
            if (pin != problem.pinned.end() && pin->second != static_cast<int>(v)) {
                continue;
            }
            if (vm_allowed(problem, problem.slots[s], problem.vms[v])) {
                problem.domains[s].push_back(static_cast<int>(v));
            }
        }
    }

    problem.capacity_rows.clear();
    if (problem.enforces(ConstraintKind::kCapacity)) {
        for (std::size_t v = 0; v < problem.vms.size(); ++v) {
            for (auto resource : {Resource::kCpu, Resource::kRam}) {
                CapacityRow row;
                row.vm = static_cast<int>(v);
                row.resource = resource;
                row.limit = resource == Resource::kCpu ? problem.vms[v].capacity.cpu_millicores
                                                       : problem.vms[v].capacity.ram_mb;
                for (std::size_t s = 0; s < slot_count; ++s) {
                    const auto& domain = problem.domains[s];
                    if (std::find(domain.begin(), domain.end(), static_cast<int>(v)) == domain.end()) {
                        continue;
                    }
                    const auto& demand = problem.slots[s].demand;
                    auto coefficient = resource == Resource::kCpu ? demand.cpu_millicores : demand.ram_mb;
                    if (coefficient != 0) {
                        row.terms.emplace_back(static_cast<int>(s), coefficient);
                    }
                }
                if (!row.terms.empty()) {
                    problem.capacity_rows.push_back(std::move(row));
                }
            }
        }
    }

    problem.distinct_ccp_groups.clear();
    if (problem.enforces(ConstraintKind::kRedundancyDistinctCcp)) {
        std::size_t begin = 0;
        while (begin < slot_count) {
            auto end = begin + 1;
            while (end < slot_count && problem.slots[end].app_id == problem.slots[begin].app_id) {
                ++end;
            }
            if (end - begin > 1) {
                std::vector<int> group;
                for (auto s = begin; s < end; ++s) {
                    group.push_back(static_cast<int>(s));
                }
                problem.distinct_ccp_groups.push_back(std::move(group));
            }
            begin = end;
        }
    }
}

} // namespace

std::set<ConstraintKind> AssignmentProblem::kinds() const {
    std::set<ConstraintKind> result;
    for (const auto& c : constraints) {
        result.insert(c.kind);
    }
    return result;
}

int AssignmentProblem::vm_index(std::string_view id) const {
    for (std::size_t v = 0; v < vms.size(); ++v) {
        if (vms[v].id == id) {
            return static_cast<int>(v);
        }
    }
    return -1;
}

AssignmentProblem assemble_problem(const InstanceModel& model, std::span<const Constraint> constraints) {
    AssignmentProblem problem;
    problem.constraints.assign(constraints.begin(), constraints.end());

    for (const auto* vm : model.vms()) {
        problem.vms.push_back(*vm);
    }
    std::sort(problem.vms.begin(), problem.vms.end(), [](const Vm& a, const Vm& b) { return a.id < b.id; });

    std::vector<const Application*> apps;
    for (const auto& app : model.applications) {
        apps.push_back(&app);
    }
    std::sort(apps.begin(), apps.end(), [](const Application* a, const Application* b) { return a->id < b->id; });
    for (const auto* app : apps) {
        for (int r = 0; r < app->redundancy; ++r) {
            auto slot_index = static_cast<int>(problem.slots.size());
            problem.slots.push_back({app->id, r, app->demand, app->safety, app->gpu});
            if (const auto* alloc = model.find_allocation(app->id, r)) {
                problem.pinned.emplace(slot_index, problem.vm_index(alloc->vm_id));
            }
        }
    }
    derive(problem);
    return problem;
}

AssignmentProblem build_problem(const InstanceModel& model, const ConstraintSet& constraints) {
    auto all = constraints.all();
    auto problem = assemble_problem(model, all);
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        if (problem.domains[s].empty()) {
            throw EmptyDomain(problem.slots[s].label());
        }
    }
    return problem;
}

AssignmentProblem relax(const AssignmentProblem& problem, ConstraintKind kind) {
    AssignmentProblem relaxed = problem;
    std::erase_if(relaxed.constraints, [kind](const Constraint& c) { return c.kind == kind; });
    if (kind == ConstraintKind::kPinning) {
        relaxed.pinned.clear();
    }
    derive(relaxed);
    return relaxed;
}

std::vector<Allocation> allocations_from_result(const InstanceModel& model, const AssignmentProblem& problem,
                                                const SolveResult& result) {
    std::vector<Allocation> added;
    if (result.status != SolveStatus::kSat) {
        return added;
    }
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        const auto& slot = problem.slots[s];
        if (model.find_allocation(slot.app_id, slot.replica_index) != nullptr) {
            continue;
        }
        added.push_back({slot.app_id, problem.vms[result.assignment[s]].id, slot.replica_index, false, false});
    }

    std::map<std::string, Allocation*> chosen;
    for (auto& alloc : added) {
        const auto* app = model.find_app(alloc.app_id);
        if (app->redundancy == 1) {
            alloc.active = true;
            continue;
        }
        bool has_active = std::any_of(model.allocations.begin(), model.allocations.end(), [&](const Allocation& a) {
            return a.app_id == alloc.app_id && a.active;
        });
        if (has_active) {
            continue;
        }
        auto [it, inserted] = chosen.emplace(alloc.app_id, &alloc);
        if (!inserted && alloc.vm_id < it->second->vm_id) {
            it->second = &alloc;
        }
    }
    for (auto& [app_id, alloc] : chosen) {
        alloc->active = true;
    }
    return added;
}

std::string_view to_string(SolveStatus status) {
    return status == SolveStatus::kSat ? "sat" : "unsat";
}

std::map<std::string, std::string> SolveResult::assignment_by_id(const AssignmentProblem& problem) const {
    std::map<std::string, std::string> out;
    for (std::size_t s = 0; s < assignment.size(); ++s) {
        out.emplace(problem.slots[s].label(), problem.vms[assignment[s]].id);
    }
    return out;
}

nlohmann::ordered_json solve_stats_to_json(const SolveStats& stats) {
    nlohmann::ordered_json doc;
    doc["nodes_explored"] = stats.nodes_explored;
    doc["duration_ms"] = stats.duration_ms;
    return doc;
}

nlohmann::ordered_json diagnosis_to_json(const UnsatDiagnosis& diagnosis) {
    nlohmann::ordered_json doc;
    doc["relaxation_hints"] = nlohmann::ordered_json::array();
    for (const auto& hint : diagnosis.relaxation_hints) {
        nlohmann::ordered_json entry;
        entry["kind"] = to_string(hint.kind);
        entry["constraints"] = hint.constraint_ids;
        entry["becomes_feasible"] = hint.becomes_feasible;
        doc["relaxation_hints"].push_back(std::move(entry));
    }
    return doc;
}

} // namespace ivim
