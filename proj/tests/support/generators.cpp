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

#include "generators.hpp"

#include "ivim/plangen.hpp"
#include "ivim/service.hpp"
#include "ivim/solver.hpp"

namespace testgen {

int uniform(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) {
    return std::bernoulli_distribution(p)(rng);
}

std::filesystem::path scenario_dir() {
    return IVIM_SCENARIO_DIR;
}

ivim::InstanceModel load_fixture(const std::string& name) {
    return ivim::parse_instance_model(ivim::read_file(scenario_dir() / name));
}

std::vector<ivim::Ccp> random_topology(Rng& rng, const TopologyShape& shape) {
    std::vector<ivim::Ccp> ccps;
    int next_vm = 0;
    for (int c = 0; c < shape.ccps; ++c) {
        ivim::Ccp ccp;
        ccp.id = "c" + std::to_string(c);
        ivim::Vm service;
        service.id = "s" + std::to_string(c);
        service.ccp_id = ccp.id;
        service.role = ivim::VmRole::kService;
        service.capacity = {2000, 2048, 0};
        ccp.vms.push_back(service);
        for (int v = 0; v < shape.user_vms_per_ccp; ++v) {
            ivim::Vm vm;
            vm.id = "v" + std::to_string(next_vm++);
            vm.ccp_id = ccp.id;
            vm.capacity.cpu_millicores = 1000 * uniform(rng, 1, 4);
            vm.capacity.ram_mb = 1024 * uniform(rng, 1, 8);
            vm.safety = chance(rng, 0.5);
            vm.gpu_access = chance(rng, 0.6);
            vm.capacity.gpu_slots = vm.gpu_access ? 1 : 0;
            ccp.vms.push_back(vm);
        }
        ccps.push_back(std::move(ccp));
    }
    return ccps;
}

std::vector<ivim::Ccp> random_small_topology(Rng& rng) {
    if (chance(rng, 0.7)) {
        return random_topology(rng, {1, uniform(rng, 1, 2)});
    }
    // Two CCPs but only one of them has a user VM: 3 VMs in total.
    auto ccps = random_topology(rng, {2, 1});
    ccps[1].vms.resize(1);
    return ccps;
}

std::vector<ivim::Application> random_applications(Rng& rng, int min_apps, int max_apps, int max_slots,
                                                   bool allow_redundancy, const std::string& id_prefix) {
    std::vector<ivim::Application> apps;
    int slots = 0;
    const int count = uniform(rng, min_apps, max_apps);
    for (int i = 0; i < count && slots < max_slots; ++i) {
        ivim::Application app;
        app.id = id_prefix + std::to_string(i);
        app.image_ref = "registry.test/" + app.id + ":" + std::to_string(uniform(rng, 1, 2));
        app.demand.cpu_millicores = 100 * uniform(rng, 1, 12);
        app.demand.ram_mb = 128 * uniform(rng, 1, 12);
        app.safety = chance(rng, 0.5);
        app.gpu = chance(rng, 0.3);
        app.demand.gpu_slots = app.gpu ? 1 : 0;
        app.redundancy = allow_redundancy && slots + 2 <= max_slots && chance(rng, 0.25) ? 2 : 1;
        slots += app.redundancy;
        apps.push_back(std::move(app));
    }
    return apps;
}

void align_with_topology(Rng& rng, std::vector<ivim::Application>& apps, const std::vector<ivim::Ccp>& topology,
                         double p) {
    std::vector<const ivim::Vm*> users;
    for (const auto& ccp : topology) {
        for (const auto& vm : ccp.vms) {
            if (vm.role == ivim::VmRole::kUser) {
                users.push_back(&vm);
            }
        }
    }
    if (users.empty()) {
        return;
    }
    for (auto& app : apps) {
        if (!chance(rng, p)) {
            continue;
        }
        const auto* vm = users[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(users.size()) - 1))];
        app.safety = vm->safety;
        app.gpu = vm->gpu_access && chance(rng, 0.5);
        app.demand.gpu_slots = app.gpu ? 1 : 0;
    }
}

std::vector<ivim::Allocation> random_fixed_allocations(Rng& rng, const ivim::InstanceModel& model) {
    std::vector<ivim::Allocation> allocs;
    auto vms = model.vms();
    for (const auto& app : model.applications) {
        if (!chance(rng, 0.2)) {
            continue;
        }
        const auto* vm = vms[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(vms.size()) - 1))];
        if (vm->role == ivim::VmRole::kService) {
            continue;
        }
        allocs.push_back({app.id, vm->id, 0, chance(rng, 0.5), app.redundancy == 1});
    }
    return allocs;
}

std::vector<ivim::Constraint> random_overlay(Rng& rng, const ivim::InstanceModel& model) {
    std::vector<ivim::Constraint> overlay;
    auto vms = model.vms();
    for (const auto& app : model.applications) {
        if (!chance(rng, 0.15)) {
            continue;
        }
        const auto* vm = vms[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(vms.size()) - 1))];
        bool require = chance(rng, 0.5);
        overlay.push_back({(require ? "req_" : "forbid_") + app.id,
                           require ? ivim::ConstraintKind::kRequireVm : ivim::ConstraintKind::kForbidVm,
                           {{"app_id", app.id}, {"vm_id", vm->id}},
                           true});
    }
    return overlay;
}

Instance random_instance(Rng& rng, std::vector<ivim::Ccp> topology, int max_slots, bool allow_redundancy) {
    Instance instance;
    instance.model.ccps = std::move(topology);
    int ccps_with_users = 0;
    for (const auto& ccp : instance.model.ccps) {
        ccps_with_users += ccp.vms.size() > 1 ? 1 : 0;
    }
    // redundant replicas need two CCPs; elsewhere they would only add Unsat draws
    allow_redundancy = allow_redundancy && ccps_with_users > 1;
    instance.model.applications = random_applications(rng, 1, max_slots, max_slots, allow_redundancy);
    align_with_topology(rng, instance.model.applications, instance.model.ccps);
    instance.model.allocations = random_fixed_allocations(rng, instance.model);
    ivim::check_integrity(instance.model);
    instance.constraints = ivim::default_catalog();
    if (chance(rng, 0.3)) {
        instance.constraints = instance.constraints.with_overlay(random_overlay(rng, instance.model));
    }
    return instance;
}

std::optional<ivim::InstanceModel> complete(const ivim::InstanceModel& model, const ivim::ConstraintSet& constraints) {
    auto all = constraints.all();
    auto problem = ivim::assemble_problem(model, all);
    auto result = ivim::solve(problem);
    if (result.status != ivim::SolveStatus::kSat) {
        return std::nullopt;
    }
    return ivim::merge_allocations(model, ivim::allocations_from_result(model, problem, result));
}

ivim::ActionPlan random_plan(Rng& rng, const ivim::PlatformState& state, const std::vector<ivim::Application>& apps,
                             int length) {
    std::vector<std::pair<std::string, std::string>> vms;  // (ccp, vm)
    for (const auto& ccp : state.ccps) {
        for (const auto& vm : ccp.vms) {
            vms.emplace_back(ccp.id, vm.vm_id);
        }
    }
    ivim::ActionPlan plan;
    if (vms.empty() || apps.empty()) {
        return plan;
    }
    for (int i = 0; i < length; ++i) {
        const auto& [ccp, vm] = vms[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(vms.size()) - 1))];
        const auto& app = apps[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(apps.size()) - 1))];
        ivim::DeploymentAction action;
        action.ordering_index = i;
        action.ccp_id = ccp;
        action.vm_id = vm;
        action.app_id = app.id;
        action.replica_index = uniform(rng, 0, app.redundancy - 1);
        action.image_ref = chance(rng, 0.1) ? "registry.test/unknown:0" : app.image_ref;
        action.demand = app.demand;
        action.active = chance(rng, 0.6);
        switch (uniform(rng, 0, 5)) {
        case 0:
            action.kind = ivim::ActionKind::kEnsureVmRunning;
            break;
        case 1:
            action.kind = ivim::ActionKind::kStopVm;
            break;
        case 2:
            action.kind = ivim::ActionKind::kPullImage;
            break;
        case 3:
        case 4:
            action.kind = ivim::ActionKind::kStartWorkload;
            break;
        default:
            action.kind = chance(rng, 0.5) ? ivim::ActionKind::kStopWorkload : ivim::ActionKind::kPromoteActive;
            break;
        }
        plan.actions.push_back(std::move(action));
    }
    return plan;
}

std::optional<ivim::InstanceModel> random_complete(Rng& rng, const std::vector<ivim::Ccp>& topology, int max_slots) {
    ivim::InstanceModel model;
    model.ccps = topology;
    model.applications = random_applications(rng, 1, max_slots, max_slots, true);
    align_with_topology(rng, model.applications, topology);
    return complete(model);
}

ivim::PlatformState reachable_state(Rng& rng, const std::vector<ivim::Ccp>& topology) {
    ivim::InstanceModel topo;
    topo.ccps = topology;
    auto state = ivim::init_platform(topo);
    const int rounds = uniform(rng, 0, 2);
    for (int i = 0; i < rounds; ++i) {
        auto other = random_complete(rng, topology, 5);
        if (!other) {
            continue;
        }
        std::vector<std::string> refs;
        for (const auto& app : other->applications) {
            refs.push_back(app.image_ref);
        }
        state = ivim::publish_images(state, refs);
        auto plan = ivim::reconcile(ivim::generate_desired_state(*other), state);
        plan.actions.resize(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(plan.actions.size()))));
        state = ivim::apply(plan, state).first;
        if (chance(rng, 0.5)) {
            state = ivim::apply(random_plan(rng, state, other->applications, uniform(rng, 1, 6)), state).first;
        }
    }
    return state;
}

}  // namespace testgen
