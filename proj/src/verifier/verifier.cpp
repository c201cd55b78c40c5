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

#include "ivim/verifier.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "ivim/error.hpp"

namespace ivim {

namespace {

std::string describe(const Allocation& alloc) {
    return alloc.app_id + "[" + std::to_string(alloc.replica_index) + "]";
}

std::vector<Violation> check_capacity(const Constraint& c, const InstanceModel& model) {
    std::map<std::string, ResourceVector> used;
    for (const auto& alloc : model.allocations) {
        if (const auto* app = model.find_app(alloc.app_id)) {
            used[alloc.vm_id] += app->demand;
        }
    }
    std::vector<Violation> out;
    for (const auto* vm : model.vms()) {
        auto it = used.find(vm->id);
        if (it == used.end()) {
            continue;
        }
        // GPU slots are shared by every workload on a VM, so only CPU and RAM add up.
        const auto& u = it->second;
        if (u.cpu_millicores > vm->capacity.cpu_millicores || u.ram_mb > vm->capacity.ram_mb) {
            out.push_back({c.id,
                           {vm->id},
                           "VM " + vm->id + " over capacity: cpu " + std::to_string(u.cpu_millicores) + "/" +
                               std::to_string(vm->capacity.cpu_millicores) + "m, ram " + std::to_string(u.ram_mb) +
                               "/" + std::to_string(vm->capacity.ram_mb) + "MB"});
        }
    }
    return out;
}

template <typename Predicate>
std::vector<Violation> check_each_allocation(const Constraint& c, const InstanceModel& model, Predicate violates,
                                             const std::string& what) {
    std::vector<Violation> out;
    for (const auto& alloc : model.allocations) {
        const auto* app = model.find_app(alloc.app_id);
        const auto* vm = model.find_vm(alloc.vm_id);
        if (app == nullptr || vm == nullptr) {
            continue;
        }
        if (violates(alloc, *app, *vm)) {
            out.push_back({c.id, {alloc.app_id, alloc.vm_id}, describe(alloc) + " on " + alloc.vm_id + ": " + what});
        }
    }
    return out;
}

std::vector<Violation> check_pinning(const Constraint& c, const InstanceModel& model, const InstanceModel& baseline) {
    std::vector<Violation> out;
    for (const auto& pinned : baseline.allocations) {
        if (!pinned.pinned) {
            continue;
        }
        const auto* now = model.find_allocation(pinned.app_id, pinned.replica_index);
        if (now == nullptr) {
            out.push_back({c.id, {pinned.app_id, pinned.vm_id}, "pinned allocation " + describe(pinned) + " on " +
                                                                    pinned.vm_id + " is missing"});
        } else if (now->vm_id != pinned.vm_id || !now->pinned) {
            out.push_back({c.id, {pinned.app_id, pinned.vm_id},
                           "pinned allocation " + describe(pinned) + " moved from " + pinned.vm_id + " to " +
                               now->vm_id});
        }
    }
    return out;
}

std::vector<Violation> check_distinct_ccp(const Constraint& c, const InstanceModel& model) {
    std::map<std::pair<std::string, std::string>, int> per_app_ccp;
    for (const auto& alloc : model.allocations) {
        const auto* app = model.find_app(alloc.app_id);
        const auto* vm = model.find_vm(alloc.vm_id);
        if (app == nullptr || vm == nullptr || app->redundancy < 2) {
            continue;
        }
        ++per_app_ccp[{alloc.app_id, vm->ccp_id}];
    }
    std::vector<Violation> out;
    for (const auto& [key, count] : per_app_ccp) {
        if (count > 1) {
            out.push_back({c.id, {key.first, key.second},
                           std::to_string(count) + " replicas of " + key.first + " share CCP " + key.second});
        }
    }
    return out;
}

} // namespace

std::string_view to_string(Disposition disposition) {
    switch (disposition) {
    case Disposition::kGeneratePlan:
        return "GeneratePlan";
    case Disposition::kSolve:
        return "Solve";
    case Disposition::kReject:
        return "Reject";
    }
    return "Reject";
}

std::vector<Violation> evaluate_constraint(const Constraint& constraint, const InstanceModel& model,
                                           const InstanceModel* baseline) {
    switch (constraint.kind) {
    case ConstraintKind::kCapacity:
        return check_capacity(constraint, model);
    case ConstraintKind::kSafetySegregation:
        return check_each_allocation(
            constraint, model, [](const Allocation&, const Application& app, const Vm& vm) { return app.safety != vm.safety; },
            "safety class of application and VM differ");
    case ConstraintKind::kGpuAffinity:
        return check_each_allocation(
            constraint, model, [](const Allocation&, const Application& app, const Vm& vm) { return app.gpu && !vm.gpu_access; },
            "GPU application on a VM without GPU access");
    case ConstraintKind::kPinning:
        return check_pinning(constraint, model, baseline != nullptr ? *baseline : model);
    case ConstraintKind::kRedundancyDistinctCcp:
        return check_distinct_ccp(constraint, model);
    case ConstraintKind::kRequireVm: {
        const auto& app_id = constraint.params.at("app_id");
        const auto& vm_id = constraint.params.at("vm_id");
        return check_each_allocation(
            constraint, model,
            [&](const Allocation& alloc, const Application&, const Vm&) { return alloc.app_id == app_id && alloc.vm_id != vm_id; },
            "required on " + vm_id);
    }
    case ConstraintKind::kForbidVm: {
        const auto& app_id = constraint.params.at("app_id");
        const auto& vm_id = constraint.params.at("vm_id");
        return check_each_allocation(
            constraint, model,
            [&](const Allocation& alloc, const Application&, const Vm&) { return alloc.app_id == app_id && alloc.vm_id == vm_id; },
            "forbidden on " + vm_id);
    }
    }
    throw UnsupportedKind("unsupported constraint kind " + std::to_string(static_cast<int>(constraint.kind)));
}

std::vector<Violation> evaluate_service_vm_rule(const InstanceModel& model) {
    Constraint rule{std::string(kServiceVmRuleId), ConstraintKind::kForbidVm, {}, false};
    return check_each_allocation(
        rule, model, [](const Allocation&, const Application&, const Vm& vm) { return vm.role == VmRole::kService; },
        "service VMs do not host applications");
}

VerificationReport verify(const InstanceModel& model, const ConstraintSet& constraints, const InstanceModel* baseline) {
    VerificationReport report;
    report.complete = is_complete(model);
    for (const auto& constraint : constraints.all()) {
        auto found = evaluate_constraint(constraint, model, baseline);
        report.violations.insert(report.violations.end(), found.begin(), found.end());
        ++report.evaluated_constraints;
    }
    auto builtin = evaluate_service_vm_rule(model);
    report.violations.insert(report.violations.end(), builtin.begin(), builtin.end());
    std::sort(report.violations.begin(), report.violations.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.constraint_id, a.subjects, a.message) < std::tie(b.constraint_id, b.subjects, b.message);
    });
    return report;
}

Disposition classify_request(const InstanceModel& model, const VerificationReport& report) {
    if (!report.clean()) {
        return Disposition::kReject;
    }
    return report.complete && is_complete(model) ? Disposition::kGeneratePlan : Disposition::kSolve;
}

nlohmann::ordered_json report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json doc;
    doc["complete"] = report.complete;
    doc["evaluated_constraints"] = report.evaluated_constraints;
    doc["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : report.violations) {
        nlohmann::ordered_json entry;
        entry["constraint"] = v.constraint_id;
        entry["subjects"] = v.subjects;
        entry["message"] = v.message;
        doc["violations"].push_back(std::move(entry));
    }
    return doc;
}

} // namespace ivim
