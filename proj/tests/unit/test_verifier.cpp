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

#include "doctest.h"
#include "generators.hpp"
#include "ivim/error.hpp"
#include "ivim/solver.hpp"
#include "ivim/verifier.hpp"

using namespace ivim;

namespace {

InstanceModel poc() { return testgen::load_fixture("poc_complete.json"); }

Allocation* find(InstanceModel& model, const std::string& app) {
    for (auto& a : model.allocations) {
        if (a.app_id == app) {
            return &a;
        }
    }
    return nullptr;
}

}  // namespace

TEST_CASE("oracle placement of PoC step 1 verifies clean") {
    auto step1 = testgen::load_fixture("poc_step1.json");
    auto problem = build_problem(step1, default_catalog());
    auto oracle = brute_force_oracle(problem);
    REQUIRE(oracle.status == SolveStatus::kSat);
    auto completed = merge_allocations(step1, allocations_from_result(step1, problem, oracle));
    auto report = verify(completed, default_catalog());
    CHECK(report.complete);
    CHECK(report.violations.empty());
    CHECK(report.evaluated_constraints == 5);
    CHECK(classify_request(completed, report) == Disposition::kGeneratePlan);
}

TEST_CASE("safety app on non-safety VM") {
    auto model = poc();
    find(model, "slam")->vm_id = "uvm2";
    auto report = verify(model, default_catalog());
    REQUIRE(report.violations.size() == 2);  // segregation, and uvm2 overflows once slam joins
    CHECK(report.violations[0].constraint_id == "capacity");
    CHECK(report.violations[1].constraint_id == "safety_segregation");
    CHECK(report.violations[1].subjects == std::vector<std::string>{"slam", "uvm2"});

    auto only = evaluate_constraint(default_catalog().base()[1], model);
    REQUIRE(only.size() == 1);
    CHECK(only[0].subjects == std::vector<std::string>{"slam", "uvm2"});
}

TEST_CASE("two apps over uvm2 CPU capacity") {
    auto model = testgen::load_fixture("poc_step1.json");
    model.applications.resize(6);
    // security_barrier_camera 800 + rviz 500 fit; bump rviz to 1700 for a 2500mc total.
    for (auto& app : model.applications) {
        if (app.id == "rviz") {
            app.demand.cpu_millicores = 1700;
        }
    }
    model.allocations = {{"security_barrier_camera", "uvm2", 0, false, true}, {"rviz", "uvm2", 0, false, true}};
    auto report = verify(model, default_catalog());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].constraint_id == "capacity");
    CHECK(report.violations[0].subjects == std::vector<std::string>{"uvm2"});
    CHECK(report.violations[0].message.find("2500/2000") != std::string::npos);
    CHECK_FALSE(report.complete);
    CHECK(classify_request(model, report) == Disposition::kReject);
}

TEST_CASE("GPU slots are shared, not summed") {
    auto model = poc();
    // uvm2 hosts three GPU apps in the complete PoC model.
    int gpu_on_uvm2 = 0;
    for (const auto& a : model.allocations) {
        gpu_on_uvm2 += a.vm_id == "uvm2" && model.find_app(a.app_id)->gpu ? 1 : 0;
    }
    CHECK(gpu_on_uvm2 == 3);
    CHECK(verify(model, default_catalog()).clean());
}

TEST_CASE("gpu app on VM without GPU") {
    auto model = testgen::load_fixture("redundant_model.json");
    model.ccps[0].vms[1].gpu_access = false;
    model.ccps[0].vms[1].capacity.gpu_slots = 0;
    model.allocations = {{"perception", "uvmA", 0, false, true}};
    Constraint gpu{"gpu", ConstraintKind::kGpuAffinity, {}, false};
    auto found = evaluate_constraint(gpu, model);
    REQUIRE(found.size() == 1);
    CHECK(found[0].constraint_id == "gpu");
    CHECK(found[0].subjects == std::vector<std::string>{"perception", "uvmA"});
}

TEST_CASE("redundant replicas on one CCP") {
    auto model = testgen::load_fixture("redundant_model.json");
    // Add a second user VM on ccpA so both replicas can sit there.
    Vm extra{"uvmA2", "ccpA", VmRole::kUser, {4000, 8192, 1}, true, true};
    model.ccps[0].vms.push_back(extra);
    model.allocations = {{"perception", "uvmA", 0, false, true}, {"perception", "uvmA2", 1, false, false}};
    Constraint distinct{"rdc", ConstraintKind::kRedundancyDistinctCcp, {}, false};
    auto found = evaluate_constraint(distinct, model);
    REQUIRE(found.size() == 1);
    CHECK(found[0].subjects == std::vector<std::string>{"perception", "ccpA"});

    model.allocations[1].vm_id = "uvmB";
    CHECK(evaluate_constraint(distinct, model).empty());
}

TEST_CASE("pinning against the request baseline") {
    auto baseline = testgen::load_fixture("poc_step2.json");
    Constraint pinning{"pinning", ConstraintKind::kPinning, {}, false};

    auto dropped = baseline;
    std::erase_if(dropped.allocations, [](const Allocation& a) { return a.app_id == "slam"; });
    auto found = evaluate_constraint(pinning, dropped, &baseline);
    REQUIRE(found.size() == 1);
    CHECK(found[0].subjects == std::vector<std::string>{"slam", "uvm1"});

    auto moved = baseline;
    find(moved, "rviz")->vm_id = "uvm1";
    CHECK(evaluate_constraint(pinning, moved, &baseline).size() == 1);

    CHECK(evaluate_constraint(pinning, baseline).empty());
    CHECK(evaluate_constraint(pinning, baseline, &baseline).empty());
}

TEST_CASE("require_vm and forbid_vm") {
    auto model = poc();
    Constraint require{"r", ConstraintKind::kRequireVm, {{"app_id", "rviz"}, {"vm_id", "uvm1"}}, true};
    Constraint forbid{"f", ConstraintKind::kForbidVm, {{"app_id", "rviz"}, {"vm_id", "uvm2"}}, true};
    Constraint harmless{"h", ConstraintKind::kForbidVm, {{"app_id", "rviz"}, {"vm_id", "uvm1"}}, true};
    CHECK(evaluate_constraint(require, model).size() == 1);
    CHECK(evaluate_constraint(forbid, model).size() == 1);
    CHECK(evaluate_constraint(harmless, model).empty());
}

TEST_CASE("applications on a service VM break the built-in rule") {
    auto model = poc();
    find(model, "rviz")->vm_id = "svm";
    auto report = verify(model, ConstraintSet{});
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].constraint_id == kServiceVmRuleId);
    CHECK(report.violations[0].subjects == std::vector<std::string>{"rviz", "svm"});
}

TEST_CASE("unknown kind is rejected") {
    Constraint bogus{"x", static_cast<ConstraintKind>(99), {}, false};
    CHECK_THROWS_AS(evaluate_constraint(bogus, poc()), UnsupportedKind);
    CHECK_THROWS_AS(constraints_from_json(nlohmann::json::parse(
                        R"({"constraints": [{"id": "x", "kind": "latency", "params": {}, "mutable_at_runtime": true}]})")),
                    UnsupportedKind);
}

TEST_CASE("classify_request") {
    auto complete = poc();
    CHECK(classify_request(complete, verify(complete, default_catalog())) == Disposition::kGeneratePlan);
    auto fresh = testgen::load_fixture("poc_step1.json");
    CHECK(classify_request(fresh, verify(fresh, default_catalog())) == Disposition::kSolve);
    auto over = testgen::load_fixture("poc_overcommitted.json");
    auto report = verify(over, default_catalog());
    CHECK(report.complete);
    CHECK(classify_request(over, report) == Disposition::kReject);
}

TEST_CASE("all violations are reported in a stable order") {
    auto model = poc();
    find(model, "slam")->vm_id = "uvm2";
    find(model, "rviz")->vm_id = "uvm1";
    find(model, "stress")->vm_id = "svm";
    auto a = verify(model, default_catalog());
    auto b = verify(model, default_catalog());
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
    CHECK(std::is_sorted(a.violations.begin(), a.violations.end()));
    std::vector<std::string> ids;
    for (const auto& v : a.violations) {
        ids.push_back(v.constraint_id);
    }
    CHECK(ids == std::vector<std::string>{"safety_segregation", "safety_segregation", std::string(kServiceVmRuleId)});
}

TEST_CASE("overlay constraints never remove violations") {
    auto model = poc();
    find(model, "slam")->vm_id = "uvm2";
    auto base = verify(model, default_catalog());
    auto extended = default_catalog().with_overlay(
        {{"pin_rviz", ConstraintKind::kRequireVm, {{"app_id", "rviz"}, {"vm_id", "uvm2"}}, true}});
    auto more = verify(model, extended);
    for (const auto& v : base.violations) {
        CHECK(std::find(more.violations.begin(), more.violations.end(), v) != more.violations.end());
    }
}

TEST_CASE("constraint set overlay rules") {
    auto catalog = default_catalog();
    CHECK_THROWS_AS(catalog.with_overlay({{"extra", ConstraintKind::kCapacity, {}, false}}), OverlayError);
    CHECK_THROWS_AS(catalog.with_overlay({{"capacity", ConstraintKind::kForbidVm, {{"app_id", "a"}, {"vm_id", "b"}}, true}}),
                    OverlayError);
    auto ok = catalog.with_overlay({{"f", ConstraintKind::kForbidVm, {{"app_id", "a"}, {"vm_id", "b"}}, true}});
    CHECK(ok.base().size() == 5);
    CHECK(ok.overlay().size() == 1);
    CHECK(ok.all().back().id == "f");

    CHECK_THROWS_AS(parse_constraints(R"({"constraints": [{"id": "r", "kind": "require_vm", "params": {"app_id": "a"}, "mutable_at_runtime": true}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_constraints(R"({"constraints": [{"id": "c", "kind": "capacity", "params": {"x": "y"}, "mutable_at_runtime": false}]})"),
                    SchemaError);
    auto round = parse_constraints(constraints_to_json(catalog.base()).dump());
    CHECK(round == std::vector<Constraint>(catalog.base().begin(), catalog.base().end()));
}
