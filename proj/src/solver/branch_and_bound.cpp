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

#include <chrono>
#include <limits>
#include <map>
#include <stdexcept>

#include "ivim/solver.hpp"

namespace ivim {

namespace {

std::int64_t permille(std::int64_t used, std::int64_t capacity) {
    if (capacity <= 0) {
        return used > 0 ? used * 1000 : 0;
    }
    return used * 1000 / capacity;
}

class BranchAndBound {
public:
    BranchAndBound(const AssignmentProblem& problem, std::uint64_t budget)
        : problem_(problem),
          budget_(budget),
          check_capacity_(problem.enforces(ConstraintKind::kCapacity)),
          cpu_used_(problem.vms.size(), 0),
          ram_used_(problem.vms.size(), 0),
          current_(problem.slots.size(), -1),
          group_of_(problem.slots.size(), -1) {
        std::map<std::string, int> ccp_ids;
        for (const auto& vm : problem.vms) {
            vm_ccp_.push_back(ccp_ids.emplace(vm.ccp_id, static_cast<int>(ccp_ids.size())).first->second);
        }
        for (std::size_t g = 0; g < problem.distinct_ccp_groups.size(); ++g) {
            for (int s : problem.distinct_ccp_groups[g]) {
                group_of_[s] = static_cast<int>(g);
            }
        }
        group_ccp_used_.assign(problem.distinct_ccp_groups.size(), std::vector<bool>(ccp_ids.size(), false));
    }

    SolveResult run() {
        search(0, 0);
        SolveResult result;
        result.stats.nodes_explored = nodes_;
        if (best_value_ != kNoIncumbent) {
            result.status = SolveStatus::kSat;
            result.assignment = best_;
            result.objective_value = best_value_;
        }
        return result;
    }

private:
    static constexpr std::int64_t kNoIncumbent = std::numeric_limits<std::int64_t>::max();

    std::int64_t load(int vm) const {
        const auto& cap = problem_.vms[vm].capacity;
        return std::max(permille(cpu_used_[vm], cap.cpu_millicores), permille(ram_used_[vm], cap.ram_mb));
    }

    // Slots are taken in index order and candidate VMs in ascending order,
    // so complete assignments are reached in lexicographic order. Pruning at
    // bound >= incumbent therefore keeps the lexicographically first optimum.
    void search(std::size_t depth, std::int64_t partial_max) {
        if (++nodes_ > budget_) {
            throw SolveTimeout(budget_);
        }
        if (depth == problem_.slots.size()) {
            best_value_ = partial_max;
            best_ = current_;
            return;
        }
        const auto& demand = problem_.slots[depth].demand;
        const int group = group_of_[depth];
        for (int vm : problem_.domains[depth]) {
            const auto& cap = problem_.vms[vm].capacity;
            if (check_capacity_ && (cpu_used_[vm] + demand.cpu_millicores > cap.cpu_millicores ||
                                    ram_used_[vm] + demand.ram_mb > cap.ram_mb)) {
                continue;
            }
            const int ccp = vm_ccp_[vm];
            if (group >= 0 && group_ccp_used_[group][ccp]) {
                continue;
            }
            cpu_used_[vm] += demand.cpu_millicores;
            ram_used_[vm] += demand.ram_mb;
            const auto bound = std::max(partial_max, load(vm));
            if (bound < best_value_) {
                if (group >= 0) {
                    group_ccp_used_[group][ccp] = true;
                }
                current_[depth] = vm;
                search(depth + 1, bound);
                current_[depth] = -1;
                if (group >= 0) {
                    group_ccp_used_[group][ccp] = false;
                }
            }
            cpu_used_[vm] -= demand.cpu_millicores;
            ram_used_[vm] -= demand.ram_mb;
        }
    }

    const AssignmentProblem& problem_;
    const std::uint64_t budget_;
    const bool check_capacity_;
    std::vector<std::int64_t> cpu_used_;
    std::vector<std::int64_t> ram_used_;
    std::vector<int> current_;
    std::vector<int> group_of_;
    std::vector<int> vm_ccp_;
    std::vector<std::vector<bool>> group_ccp_used_;
    std::vector<int> best_;
    std::int64_t best_value_ = kNoIncumbent;
    std::uint64_t nodes_ = 0;
};

} // namespace

SolveResult solve(const AssignmentProblem& problem, const SolveOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result = BranchAndBound(problem, options.node_budget).run();
    result.stats.duration_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (result.status == SolveStatus::kSat && !assignment_feasible(problem, result.assignment)) {
        throw std::logic_error("branch-and-bound produced an infeasible assignment");
    }
    return result;
}

UnsatDiagnosis diagnose_unsat(const AssignmentProblem& problem, const SolveOptions& options) {
    UnsatDiagnosis diagnosis;
    for (auto kind : problem.kinds()) {
        RelaxationHint hint;
        hint.kind = kind;
        for (const auto& c : problem.constraints) {
            if (c.kind == kind) {
                hint.constraint_ids.push_back(c.id);
            }
        }
        try {
            hint.becomes_feasible = solve(relax(problem, kind), options).status == SolveStatus::kSat;
        } catch (const SolveTimeout&) {
            hint.becomes_feasible = false;
        }
        diagnosis.relaxation_hints.push_back(std::move(hint));
    }
    return diagnosis;
}

} // namespace ivim
