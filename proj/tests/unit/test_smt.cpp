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
#include "ivim/solver.hpp"
#include "smt_check.hpp"

using namespace ivim;

namespace {

std::map<std::string, std::int64_t> values_for(const AssignmentProblem& problem, const std::vector<int>& assignment) {
    std::map<std::string, std::int64_t> values;
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        for (int v : problem.domains[s]) {
            values[smt_variable_name(problem.slots[s], problem.vms[v])] = assignment[s] == v ? 1 : 0;
        }
    }
    return values;
}

AssignmentProblem two_vm_problem() {
    AssignmentProblem problem;
    problem.vms = {{"uvm1", "c", VmRole::kUser, {1000, 1024, 0}, false, false},
                   {"uvm2", "c", VmRole::kUser, {1000, 1024, 0}, false, false}};
    problem.slots = {{"a", 0, {100, 128, 0}, false, false}};
    problem.domains = {{0, 1}};
    return problem;
}

}  // namespace

TEST_CASE("one slot, two candidates") {
    auto script = export_smtlib(two_vm_problem());
    CHECK(script.find("(declare-fun x_a0_uvm1 () Int)") != std::string::npos);
    CHECK(script.find("(declare-fun x_a0_uvm2 () Int)") != std::string::npos);
    CHECK(script.find("(assert (= (+ x_a0_uvm1 x_a0_uvm2) 1))") != std::string::npos);
    CHECK(script.find("(set-logic QF_LIA)") != std::string::npos);
    CHECK(script.ends_with("(check-sat)\n"));
    auto parsed = smtcheck::parse_script(script);
    CHECK(parsed.logic == "QF_LIA");
    CHECK(parsed.info.at(":smt-lib-version") == "2.6");
    CHECK(parsed.declarations.size() == 2);
}

TEST_CASE("pinned slot becomes an equality") {
    auto model = testgen::load_fixture("poc_step2.json");
    auto problem = build_problem(model, default_catalog());
    auto script = export_smtlib(problem);
    CHECK(script.find("(assert (= x_slam0_uvm1 1))") != std::string::npos);
    CHECK(script.find("(assert (= x_rviz0_uvm2 1))") != std::string::npos);
    CHECK_NOTHROW(smtcheck::parse_script(script));
}

TEST_CASE("variable names percent-encode identifiers") {
    Slot slot{"cam_front.v2", 1, {}, false, false};
    Vm vm{"uvm-1", "c", VmRole::kUser, {1000, 1, 0}, false, false};
    CHECK(smt_variable_name(slot, vm) == "x_cam%5Ffront%2Ev21_uvm%2D1");
    CHECK(smtcheck::tokenize(smt_variable_name(slot, vm)).size() == 1);
}

TEST_CASE("colliding names are refused") {
    // Replica indices are appended without a separator, so "a1" replica 1
    // and "a" replica 11 would share a name.
    AssignmentProblem problem;
    problem.vms = {{"v", "c", VmRole::kUser, {1000, 1024, 0}, false, false}};
    problem.slots = {{"a1", 1, {}, false, false}, {"a11", 0, {}, false, false}};
    problem.domains = {{0}, {0}};
    CHECK(smt_variable_name(problem.slots[0], problem.vms[0]) == "x_a11_v");
    CHECK(smt_variable_name(problem.slots[1], problem.vms[0]) == "x_a110_v");
    CHECK_NOTHROW(export_smtlib(problem));
    problem.slots = {{"a1", 1, {}, false, false}, {"a", 11, {}, false, false}};
    CHECK_THROWS_AS(export_smtlib(problem), Error);
}

TEST_CASE("empty domain exports as a false assertion") {
    auto model = testgen::load_fixture("poc_step1.json");
    model.applications.push_back({"orphan", "registry.test/orphan:1", {100, 100, 1}, true, true, 1});
    model.ccps[0].vms[1].gpu_access = false;
    model.ccps[0].vms[1].capacity.gpu_slots = 0;
    auto problem = assemble_problem(model, default_catalog().all());
    auto script = export_smtlib(problem);
    CHECK(script.find("(assert false)") != std::string::npos);
    CHECK_NOTHROW(smtcheck::parse_script(script));
}

TEST_CASE("export is deterministic and capacity rows are linear") {
    auto model = testgen::load_fixture("poc_step1.json");
    auto problem = build_problem(model, default_catalog());
    auto a = export_smtlib(problem);
    CHECK(a == export_smtlib(build_problem(model, default_catalog())));
    CHECK(a.find("(* 1500 x_object%5Fdetection0_uvm1)") != std::string::npos);
    CHECK(a.find(" 4000))") != std::string::npos);
}

TEST_CASE("solver assignment satisfies every emitted assertion") {
    for (const char* name : {"poc_step1.json", "poc_step2.json", "redundant_model.json"}) {
        CAPTURE(name);
        auto model = testgen::load_fixture(name);
        auto problem = build_problem(model, default_catalog());
        auto result = solve(problem);
        REQUIRE(result.status == SolveStatus::kSat);
        auto script = smtcheck::parse_script(export_smtlib(problem));
        CHECK(smtcheck::failing_assertions(script, values_for(problem, result.assignment)).empty());

        // And a perturbed assignment breaks at least one assertion.
        auto values = values_for(problem, result.assignment);
        values.begin()->second = 1 - values.begin()->second;
        CHECK_FALSE(smtcheck::failing_assertions(script, values).empty());
    }
}

TEST_CASE("checker rejects malformed scripts") {
    using smtcheck::parse_script;
    using smtcheck::SyntaxError;
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(assert (= x 1))\n(check-sat)\n"), SyntaxError);
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(declare-fun x () Int)\n(assert (+ x 1))\n(check-sat)\n"), SyntaxError);
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(declare-fun x () Int)\n(assert (= x 1)\n(check-sat)\n"), SyntaxError);
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(declare-fun x () Int)\n(declare-fun y () Int)\n(assert (= (* x y) 1))\n(check-sat)\n"),
                    SyntaxError);
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(declare-fun x () Int)\n(assert (= x 01))\n(check-sat)\n"), SyntaxError);
    CHECK_THROWS_AS(parse_script("(set-logic QF_LIA)\n(declare-fun x () Int)\n(assert (= x 1))\n"), SyntaxError);
    CHECK_THROWS_AS(parse_script("(declare-fun x () Int)\n(check-sat)\n"), SyntaxError);
    CHECK_NOTHROW(parse_script("; comment\n(set-logic QF_LIA)\n(declare-fun x () Int)\n(assert (and (>= x 0) (<= x 1)))\n(check-sat)\n"));
}
