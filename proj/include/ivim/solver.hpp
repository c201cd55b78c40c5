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
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ivim/constraints.hpp"
#include "ivim/error.hpp"
#include "ivim/model.hpp"
#include "json.hpp"

namespace ivim {

/// Pre-filtering left a decision slot without any candidate VM.
class EmptyDomain : public Error {
public:
    explicit EmptyDomain(std::string slot)
        : Error("no candidate VM for slot " + slot), slot_(std::move(slot)) {}
    const std::string& slot() const noexcept { return slot_; }

private:
    std::string slot_;
};

/// The branch-and-bound node budget ran out before optimality was proven.
class SolveTimeout : public Error {
public:
    explicit SolveTimeout(std::uint64_t budget)
        : Error("node budget of " + std::to_string(budget) + " exhausted"), budget_(budget) {}
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t budget_;
};

class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

/// One decision: which VM hosts replica `replica_index` of `app_id`.
struct Slot {
    std::string app_id;
    int replica_index = 0;
    ResourceVector demand;
    bool safety = false;
    bool gpu = false;

    std::string label() const { return app_id + "[" + std::to_string(replica_index) + "]"; }
    bool operator==(const Slot&) const = default;
};

enum class Resource { kCpu, kRam };

/// sum over terms of coefficient * x[slot][vm] <= limit, for one VM and resource.
struct CapacityRow {
    int vm = 0;
    Resource resource = Resource::kCpu;
    std::int64_t limit = 0;
    std::vector<std::pair<int, std::int64_t>> terms;  // (slot, coefficient)

    bool operator==(const CapacityRow&) const = default;
};

/// Minimise the largest per-VM load in permille, where a VM's load is
/// max(cpu_used * 1000 / cpu_cap, ram_used * 1000 / ram_cap) with integer
/// division. Ties go to the lexicographically smallest vector of VM indices
/// in slot order.
struct Objective {
    enum class Kind { kMinMaxLoadThenLexicographic };
    Kind kind = Kind::kMinMaxLoadThenLexicographic;
    bool operator==(const Objective&) const = default;
};

struct AssignmentProblem {
    std::vector<Slot> slots;          // ascending (app_id, replica_index)
    std::vector<Vm> vms;              // ascending id
    std::vector<std::vector<int>> domains;  // per slot, ascending VM indices
    std::vector<CapacityRow> capacity_rows;
    std::map<int, int> pinned;        // slot -> VM, from existing allocations
    std::vector<std::vector<int>> distinct_ccp_groups;  // replicas that need pairwise-distinct CCPs
    std::vector<Constraint> constraints;  // active catalog entries this problem was built from
    Objective objective;

    std::set<ConstraintKind> kinds() const;
    bool enforces(ConstraintKind kind) const { return kinds().contains(kind); }
    int vm_index(std::string_view id) const;

    bool operator==(const AssignmentProblem&) const = default;
};

enum class SolveStatus { kSat, kUnsat };

std::string_view to_string(SolveStatus status);

struct SolveStats {
    std::uint64_t nodes_explored = 0;
    std::int64_t duration_ms = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::kUnsat;
    std::vector<int> assignment;  // slot -> VM index; empty unless Sat
    std::int64_t objective_value = 0;
    SolveStats stats;

    /// Slot label -> VM id.
    std::map<std::string, std::string> assignment_by_id(const AssignmentProblem& problem) const;
};

struct SolveOptions {
    std::uint64_t node_budget = 10'000'000;
};

/// Builds the problem and throws EmptyDomain if some slot has no candidate.
AssignmentProblem build_problem(const InstanceModel& model, const ConstraintSet& constraints);

/// Same as build_problem but tolerates empty domains (the problem is then
/// trivially infeasible). Used for diagnosis and export of infeasible input.
AssignmentProblem assemble_problem(const InstanceModel& model, std::span<const Constraint> constraints);

/// Copy of `problem` with every constraint of `kind` dropped and domains,
/// rows and pins recomputed.
AssignmentProblem relax(const AssignmentProblem& problem, ConstraintKind kind);

/// Depth-first branch-and-bound. Throws SolveTimeout when the budget runs out.
SolveResult solve(const AssignmentProblem& problem, const SolveOptions& options = {});

/// Exhaustive enumeration over all |vms|^|slots| assignments, checking every
/// constraint directly instead of through the pre-filtered domains. Limited
/// to 10 slots and 4 VMs.
SolveResult brute_force_oracle(const AssignmentProblem& problem);

/// Constraint check used by the oracle and as a post-condition of solve().
bool assignment_feasible(const AssignmentProblem& problem, std::span<const int> assignment);

/// New allocations for the slots `model` does not place yet. Redundant
/// applications without an active replica get the new replica on the
/// lowest VM id as active.
std::vector<Allocation> allocations_from_result(const InstanceModel& model, const AssignmentProblem& problem,
                                                const SolveResult& result);

/// SMT-LIB v2.6 (QF_LIA) rendering of the problem's feasibility question.
std::string export_smtlib(const AssignmentProblem& problem);

/// x_<app><replica>_<vm>, with non-alphanumeric characters percent-encoded.
std::string smt_variable_name(const Slot& slot, const Vm& vm);

struct RelaxationHint {
    ConstraintKind kind = ConstraintKind::kCapacity;
    std::vector<std::string> constraint_ids;
    bool becomes_feasible = false;

    bool operator==(const RelaxationHint&) const = default;
};

struct UnsatDiagnosis {
    std::vector<RelaxationHint> relaxation_hints;  // one per kind present, in kind order

    bool operator==(const UnsatDiagnosis&) const = default;
};

/// Re-solves with each constraint kind removed in isolation.
UnsatDiagnosis diagnose_unsat(const AssignmentProblem& problem, const SolveOptions& options = {});

nlohmann::ordered_json solve_stats_to_json(const SolveStats& stats);
nlohmann::ordered_json diagnosis_to_json(const UnsatDiagnosis& diagnosis);

} // namespace ivim
