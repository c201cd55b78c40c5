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

#include <cstdio>

#include "doctest.h"
#include "generators.hpp"
#include "ivim/plangen.hpp"
#include "ivim/platform.hpp"
#include "ivim/solver.hpp"

using namespace ivim;

namespace {

DeploymentAction ensure_vm(const std::string& ccp, const std::string& vm) {
    DeploymentAction a;
    a.kind = ActionKind::kEnsureVmRunning;
    a.ccp_id = ccp;
    a.vm_id = vm;
    return a;
}

DeploymentAction pull(const std::string& ccp, const std::string& image) {
    DeploymentAction a;
    a.kind = ActionKind::kPullImage;
    a.ccp_id = ccp;
    a.image_ref = image;
    return a;
}

DeploymentAction start(const std::string& vm, const std::string& app, int replica, const std::string& image,
                       ResourceVector demand, bool active) {
    DeploymentAction a;
    a.kind = ActionKind::kStartWorkload;
    a.vm_id = vm;
    a.app_id = app;
    a.replica_index = replica;
    a.image_ref = image;
    a.demand = demand;
    a.active = active;
    return a;
}

ActionPlan plan_of(std::vector<DeploymentAction> actions) {
    for (std::size_t i = 0; i < actions.size(); ++i) {
        actions[i].ordering_index = static_cast<int>(i);
    }
    return {std::move(actions)};
}

InstanceModel completed(const std::string& fixture) {
    auto model = testgen::load_fixture(fixture);
    auto result = testgen::complete(model);
    REQUIRE(result.has_value());
    return *result;
}

PlatformState deployed(const InstanceModel& model) {
    auto state = init_platform(model);
    auto [next, report] = apply(reconcile(generate_desired_state(model), state), state);
    REQUIRE(report.all_ok());
    return next;
}

const WorkloadState* workload(const PlatformState& state, const std::string& app, int replica) {
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            for (const auto& w : vm.workloads) {
                if (w.app_id == app && w.replica_index == replica) {
                    return &w;
                }
            }
        }
    }
    return nullptr;
}

std::string sha256_via_coreutils(const std::string& text) {
    auto tmp = std::filesystem::temp_directory_path() / "ivim_digest_input.txt";
    {
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        REQUIRE(f != nullptr);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    std::string cmd = "sha256sum " + tmp.string() + " 2>/dev/null";
    std::FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) {
        return {};
    }
    char buf[128] = {};
    std::string out;
    if (std::fgets(buf, sizeof buf, p) != nullptr) {
        out = buf;
    }
    pclose(p);
    std::filesystem::remove(tmp);
    return out.size() >= 64 ? out.substr(0, 64) : std::string{};
}

} // namespace

TEST_CASE("init_platform brings up service VMs only") {
    auto topo = testgen::load_fixture("poc_topology.json");
    auto state = init_platform(topo);
    REQUIRE(state.ccps.size() == 1);
    CHECK(state.ccps[0].alive);
    CHECK(state.ccps[0].image_cache.empty());
    CHECK(state.clock == 0);
    REQUIRE(state.ccps[0].vms.size() == 3);
    for (const auto& vm : state.ccps[0].vms) {
        CHECK(vm.workloads.empty());
        CHECK(vm.phase == (vm.role == VmRole::kService ? VmPhase::kRunning : VmPhase::kStopped));
    }
    // registry seeded with every image of the topology document
    CHECK(state.registry.size() == topo.applications.size());
    for (const auto& app : topo.applications) {
        CHECK(state.registry.contains(app.image_ref));
    }
    CHECK(check_invariants(state).empty());
    CHECK(running_workload_count(state) == 0);
}

TEST_CASE("init_platform with two CCPs") {
    auto state = init_platform(testgen::load_fixture("redundant_model.json"));
    REQUIRE(state.ccps.size() == 2);
    CHECK(state.find_ccp("ccpA") != nullptr);
    CHECK(state.find_ccp("ccpZ") == nullptr);
    auto [ccp, vm] = state.find_vm("uvmB");
    REQUIRE(vm != nullptr);
    CHECK(ccp->id == "ccpB");
    CHECK(vm->capacity.cpu_millicores == 4000);
    CHECK(vm->capacity.ram_mb == 8192);
    CHECK(vm->capacity.gpu_slots == 1);
}

TEST_CASE("apply pulls from the registry and starts workloads") {
    auto state = init_platform(testgen::load_fixture("redundant_model.json"));
    auto image = *state.registry.begin();
    auto plan = plan_of({ensure_vm("ccpA", "uvmA"), pull("ccpA", image),
                         start("uvmA", "planner", 0, image, {800, 1024, 0}, true)});
    auto [next, report] = apply(plan, state);
    REQUIRE(report.outcomes.size() == 3);
    CHECK(report.all_ok());
    CHECK(next.find_ccp("ccpA")->image_cache.contains(image));
    CHECK(next.find_ccp("ccpB")->image_cache.empty());
    CHECK(running_workload_count(next) == 1);
    CHECK(report.final_state_digest == state_digest(next));
    CHECK(check_invariants(next).empty());
}

TEST_CASE("a failing action is recorded and later actions still run") {
    auto state = init_platform(testgen::load_fixture("redundant_model.json"));
    const std::string known = *state.registry.begin();
    auto plan = plan_of({
        pull("ccpA", "registry.test/missing:1"),
        start("uvmA", "x", 0, known, {100, 100, 0}, true),  // VM still stopped
        ensure_vm("ccpA", "uvmA"),
        start("uvmA", "y", 0, "registry.test/missing:1", {100, 100, 0}, true),
        start("uvmA", "z", 0, known, {5000, 100, 0}, true),  // over 4000m
        start("uvmA", "w", 0, known, {100, 100, 0}, true),
        start("uvmA", "w", 1, known, {100, 100, 0}, true),  // second active replica
        start("uvmA", "w", 0, known, {100, 100, 0}, false), // duplicate key
        ensure_vm("ccpA", "nope"),
        pull("ccpQ", known),
    });
    auto [next, report] = apply(plan, state);
    REQUIRE(report.outcomes.size() == 10);
    CHECK(report.outcomes[0].reason == FailureReason::kImageNotFound);
    CHECK(report.outcomes[1].reason == FailureReason::kVmNotRunning);
    CHECK(report.outcomes[2].ok());
    CHECK(report.outcomes[3].reason == FailureReason::kImageNotFound);
    CHECK(report.outcomes[4].reason == FailureReason::kCapacityExceeded);
    CHECK(report.outcomes[5].ok());
    CHECK(report.outcomes[6].reason == FailureReason::kConflict);
    CHECK(report.outcomes[7].reason == FailureReason::kConflict);
    CHECK(report.outcomes[8].reason == FailureReason::kNotFound);
    CHECK(report.outcomes[9].reason == FailureReason::kNotFound);
    CHECK_FALSE(report.all_ok());
    CHECK(running_workload_count(next) == 1);
    CHECK(check_invariants(next).empty());
    CHECK(to_string(FailureReason::kConflict) == "Conflict");
}

TEST_CASE("StopVm refuses a VM that still hosts workloads") {
    auto model = completed("poc_step1.json");
    auto state = deployed(model);
    DeploymentAction stop;
    stop.kind = ActionKind::kStopVm;
    stop.ccp_id = "ccp0";
    stop.vm_id = "uvm1";
    auto [next, report] = apply(plan_of({stop}), state);
    CHECK(report.outcomes[0].reason == FailureReason::kConflict);
    CHECK(next == state);
}

TEST_CASE("actions against a dead CCP fail") {
    auto model = completed("poc_step1.json");
    auto state = inject_failure(init_platform(model), "ccp0");
    auto [next, report] = apply(reconcile(generate_desired_state(model), state), state);
    for (const auto& outcome : report.outcomes) {
        CHECK(outcome.reason == FailureReason::kDeadCcp);
    }
    CHECK(running_workload_count(next) == 0);
}

TEST_CASE("PoC step 1 deploys six running workloads with a reproducible digest") {
    auto model = completed("poc_step1.json");
    auto a = deployed(model);
    auto b = deployed(model);
    CHECK(running_workload_count(a) == 6);
    CHECK(a == b);
    CHECK(state_digest(a) == state_digest(b));
    CHECK(state_digest(a) != state_digest(init_platform(model)));
    CHECK(check_invariants(a).empty());
}

TEST_CASE("digest is SHA-256 of the compact snapshot content") {
    auto state = deployed(completed("poc_step1.json"));
    auto digest = state_digest(state);
    REQUIRE(digest.size() == 7 + 64);
    CHECK(digest.rfind("sha256:", 0) == 0);
    CHECK(digest.substr(7).find_first_not_of("0123456789abcdef") == std::string::npos);

    auto doc = nlohmann::ordered_json::parse(snapshot(state));
    CHECK(doc["digest"] == digest);
    doc.erase("digest");
    auto independent = sha256_via_coreutils(doc.dump());
    if (independent.empty()) {
        MESSAGE("sha256sum unavailable; cross-check skipped");
    } else {
        CHECK(digest == "sha256:" + independent);
    }
}

TEST_CASE("tick on a healthy platform only advances the clock") {
    auto state = deployed(completed("poc_step1.json"));
    auto next = tick(state);
    CHECK(next.clock == state.clock + 1);
    next.clock = state.clock;
    CHECK(next == state);
}

TEST_CASE("failover promotes the surviving replica") {
    auto model = completed("redundant_model.json");
    auto state = deployed(model);
    const auto* before = workload(state, "perception", 0);
    REQUIRE(before != nullptr);
    REQUIRE(workload(state, "perception", 1) != nullptr);
    CHECK(before->active);

    REQUIRE(state.find_vm("uvmA").second != nullptr);
    state = inject_failure(state, "ccpA");
    // failure detection happens on the next tick
    CHECK(workload(state, "perception", 0)->phase == WorkloadPhase::kRunning);

    state = tick(state);
    CHECK(workload(state, "perception", 0)->phase == WorkloadPhase::kFailed);
    CHECK_FALSE(workload(state, "perception", 0)->active);
    CHECK(workload(state, "perception", 1)->active);
    CHECK(workload(state, "perception", 1)->phase == WorkloadPhase::kRunning);
    CHECK(check_invariants(state).empty());

    // further ticks are stable
    auto again = tick(state);
    again.clock = state.clock;
    CHECK(again == state);
}

TEST_CASE("without a standby nothing is promoted") {
    auto model = completed("redundant_model.json");
    auto state = deployed(model);
    const auto* planner = workload(state, "planner", 0);
    REQUIRE(planner != nullptr);
    std::string planner_ccp;
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            for (const auto& w : vm.workloads) {
                if (w.app_id == "planner") {
                    planner_ccp = ccp.id;
                }
            }
        }
    }
    state = tick(inject_failure(state, planner_ccp));
    CHECK(workload(state, "planner", 0)->phase == WorkloadPhase::kFailed);
    CHECK(workload(state, "planner", 0)->active);
    CHECK(check_invariants(state).empty());
}

TEST_CASE("inject_failure is idempotent and validates the CCP") {
    auto state = init_platform(testgen::load_fixture("redundant_model.json"));
    auto once = inject_failure(state, "ccpB");
    CHECK_FALSE(once.find_ccp("ccpB")->alive);
    CHECK(once.find_ccp("ccpA")->alive);
    CHECK(inject_failure(once, "ccpB") == once);
    CHECK_THROWS_AS(inject_failure(state, "ccpX"), UnknownCcp);
}

TEST_CASE("snapshot round-trips and detects tampering") {
    auto state = tick(inject_failure(deployed(completed("redundant_model.json")), "ccpA"));
    auto text = snapshot(state);
    auto parsed = parse_snapshot(text);
    CHECK(parsed == state);
    CHECK(snapshot(parsed) == text);

    auto doc = nlohmann::ordered_json::parse(text);
    doc["clock"] = state.clock + 7;
    CHECK_THROWS_AS(parse_snapshot(doc.dump()), IntegrityError);
    doc.erase("digest");
    CHECK(parse_snapshot(doc.dump()).clock == state.clock + 7);

    CHECK_THROWS_AS(parse_snapshot("{"), SchemaError);
    CHECK_THROWS_AS(parse_snapshot(R"({"clock":0,"registry":[],"ccps":[],"extra":1})"), SchemaError);
}

TEST_CASE("check_invariants reports broken states") {
    auto state = deployed(completed("poc_step1.json"));
    SUBCASE("capacity") {
        state.find_vm("uvm2").second->workloads[0].demand.cpu_millicores = 999999;
        CHECK_FALSE(check_invariants(state).empty());
    }
    SUBCASE("workload on a stopped VM") {
        state.find_vm("uvm2").second->phase = VmPhase::kStopped;
        CHECK_FALSE(check_invariants(state).empty());
    }
    SUBCASE("two active replicas") {
        auto* vm = state.find_vm("uvm2").second;
        auto copy = vm->workloads[0];
        copy.replica_index = 1;
        vm->workloads.push_back(copy);
        CHECK_FALSE(check_invariants(state).empty());
    }
    SUBCASE("duplicate key") {
        auto* vm = state.find_vm("uvm2").second;
        auto copy = vm->workloads[0];
        copy.active = false;
        vm->workloads.push_back(copy);
        CHECK_FALSE(check_invariants(state).empty());
    }
}
