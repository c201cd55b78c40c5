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

// Exhaustive reference solver. Deliberately shares no code with the
// branch-and-bound: constraints are evaluated on full assignments from the
// problem's raw slot/VM attributes, ignoring domains and capacity rows.

#include <map>
#include <set>

#include "ivim/solver.hpp"

namespace ivim {

namespace {

constexpr std::size_t kMaxOracleSlots = 10;
constexpr std::size_t kMaxOracleVms = 4;

std::int64_t objective_of(const AssignmentProblem& problem, std::span<const int> assignment) {
    std::int64_t worst = 0;
    for (std::size_t v = 0; v < problem.vms.size(); ++v) {
        std::int64_t cpu = 0;
        std::int64_t ram = 0;
        for (std::size_t s = 0; s < assignment.size(); ++s) {
            if (assignment[s] == static_cast<int>(v)) {
                cpu += problem.slots[s].demand.cpu_millicores;
                ram += problem.slots[s].demand.ram_mb;
            }
        }
        const auto& cap = problem.vms[v].capacity;
        auto ratio = [](std::int64_t used, std::int64_t total) -> std::int64_t {
            if (total == 0) {
                return used == 0 ? 0 : used * 1000;
            }
            return (used * 1000) / total;
        };
        worst = std::max({worst, ratio(cpu, cap.cpu_millicores), ratio(ram, cap.ram_mb)});
    }
    return worst;
}

} // namespace

bool assignment_feasible(const AssignmentProblem& problem, std::span<const int> assignment) {
    if (assignment.size() != problem.slots.size()) {
        return false;
    }
    const auto kinds = problem.kinds();
    std::map<int, ResourceVector> used;
    std::map<std::string, std::set<std::string>> app_ccps;
    std::map<std::string, int> app_replicas;

    for (std::size_t s = 0; s < assignment.size(); ++s) {
        const int v = assignment[s];
        if (v < 0 || v >= static_cast<int>(problem.vms.size())) {
            return false;
        }
        const auto& slot = problem.slots[s];
        const auto& vm = problem.vms[v];
        if (vm.role == VmRole::kService) {
            return false;
        }
        if (auto pin = problem.pinned.find(static_cast<int>(s)); pin != problem.pinned.end() && pin->second != v) {
            return false;
        }
        if (kinds.contains(ConstraintKind::kSafetySegregation) && slot.safety != vm.safety) {
            return false;
        }
        if (kinds.contains(ConstraintKind::kGpuAffinity) && slot.gpu && !vm.gpu_access) {
            return false;
        }
        for (const auto& c : problem.constraints) {
            if (c.kind == ConstraintKind::kRequireVm && c.params.at("app_id") == slot.app_id &&
                c.params.at("vm_id") != vm.id) {
                return false;
            }
            if (c.kind == ConstraintKind::kForbidVm && c.params.at("app_id") == slot.app_id &&
                c.params.at("vm_id") == vm.id) {
                return false;
            }
        }
        used[v] += slot.demand;
        app_ccps[slot.app_id].insert(vm.ccp_id);
        ++app_replicas[slot.app_id];
    }

    if (kinds.contains(ConstraintKind::kCapacity)) {
        for (const auto& [v, total] : used) {
            const auto& cap = problem.vms[v].capacity;
            if (total.cpu_millicores > cap.cpu_millicores || total.ram_mb > cap.ram_mb) {
                return false;
            }
        }
    }
    if (kinds.contains(ConstraintKind::kRedundancyDistinctCcp)) {
        for (const auto& [app, ccps] : app_ccps) {
            if (static_cast<int>(ccps.size()) != app_replicas[app]) {
                return false;
            }
        }
    }
    return true;
}

SolveResult brute_force_oracle(const AssignmentProblem& problem) {
    const auto n = problem.slots.size();
    const auto m = problem.vms.size();
    if (n > kMaxOracleSlots || m > kMaxOracleVms) {
        throw InstanceTooLarge("oracle handles at most " + std::to_string(kMaxOracleSlots) + " slots and " +
                               std::to_string(kMaxOracleVms) + " VMs, got " + std::to_string(n) + " and " +
                               std::to_string(m));
    }
    SolveResult result;
    if (n > 0 && m == 0) {
        return result;
    }

    // Odometer with the last slot varying fastest visits assignments in
    // lexicographic order; keeping only strict improvements leaves the
    // lexicographically smallest optimum.
    std::vector<int> candidate(n, 0);
    bool found = false;
    while (true) {
        ++result.stats.nodes_explored;
        if (assignment_feasible(problem, candidate)) {
            auto value = objective_of(problem, candidate);
            if (!found || value < result.objective_value) {
                found = true;
                result.objective_value = value;
                result.assignment = candidate;
            }
        }
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++candidate[pos] < static_cast<int>(m)) {
                break;
            }
            candidate[pos] = 0;
            if (pos == 0) {
                pos = n + 1;  // wrapped around
                break;
            }
        }
        if (n == 0 || pos == n + 1) {
            break;
        }
    }
    if (found) {
        result.status = SolveStatus::kSat;
    } else {
        result.objective_value = 0;
    }
    return result;
}

} // namespace ivim
