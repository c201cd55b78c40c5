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
#include <string>
#include <string_view>
#include <vector>

#include "ivim/constraints.hpp"
#include "ivim/model.hpp"
#include "json.hpp"

namespace ivim {

/// Id reported for the built-in rule that keeps applications off service VMs.
inline constexpr std::string_view kServiceVmRuleId = "service_vm_exclusion";

struct Violation {
    std::string constraint_id;
    std::vector<std::string> subjects;
    std::string message;

    auto operator<=>(const Violation&) const = default;
};

struct VerificationReport {
    bool complete = false;
    std::vector<Violation> violations;
    int evaluated_constraints = 0;

    bool clean() const { return violations.empty(); }
    bool operator==(const VerificationReport&) const = default;
};

enum class Disposition { kGeneratePlan, kSolve, kReject };

std::string_view to_string(Disposition disposition);

/// Violations of a single constraint. `baseline` is the model as it arrived
/// in the request; pinned allocations there must survive unchanged. Without
/// a baseline the model is its own baseline.
std::vector<Violation> evaluate_constraint(const Constraint& constraint, const InstanceModel& model,
                                           const InstanceModel* baseline = nullptr);

/// Applications placed on service VMs. Always evaluated by verify().
std::vector<Violation> evaluate_service_vm_rule(const InstanceModel& model);

/// Evaluates every constraint plus the built-in rule. Violations are sorted
/// by constraint id, then subjects.
VerificationReport verify(const InstanceModel& model, const ConstraintSet& constraints,
                          const InstanceModel* baseline = nullptr);

Disposition classify_request(const InstanceModel& model, const VerificationReport& report);

nlohmann::ordered_json report_to_json(const VerificationReport& report);

} // namespace ivim
