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

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "ivim/service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

ivim::InstanceModel load_model(const std::string& path) {
    return ivim::parse_instance_model(ivim::read_file(path));
}

ivim::ConstraintSet load_catalog(const std::string& path) {
    if (path.empty()) {
        return ivim::default_catalog();
    }
    return ivim::ConstraintSet(ivim::parse_constraints(ivim::read_file(path)));
}

void print_violations(const ivim::VerificationReport& report) {
    for (const auto& v : report.violations) {
        std::cerr << "violation " << v.constraint_id << ": " << v.message << "\n";
    }
}

int run_serve(const std::string& topology_path, const std::string& constraints_path, bool sim_admin) {
    auto topology = load_model(topology_path);
    auto address = ivim::listen_address_from_env();

    // Handle SIGINT/SIGTERM on a dedicated thread so the server can stop cleanly.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ivim::IntegrationManager manager(ivim::init_platform(topology), load_catalog(constraints_path));
    ivim::ApiServer server(manager, sim_admin);
    int port = server.bind(address.host, address.port);
    if (port < 0) {
        std::cerr << "ivim: cannot listen on " << address.host << ":" << address.port << "\n";
        return kExitUsage;
    }
    std::cerr << "ivim: listening on " << address.host << ":" << port << (sim_admin ? " (sim-admin)" : "") << "\n";

    std::thread([&server, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    }).detach();

    server.serve();
    return kExitOk;
}

int run_send(const std::string& endpoint, const std::string& model_path, const std::string& server_url,
             const std::string& constraints_path, bool dry_run) {
    ivim::IntegrationRequest request;
    request.model = load_model(model_path);
    if (!constraints_path.empty()) {
        request.overlay = ivim::parse_constraints(ivim::read_file(constraints_path));
    }
    request.dry_run = dry_run;

    httplib::Client client(server_url);
    client.set_read_timeout(120, 0);
    auto result = client.Post("/api/v1/" + endpoint, ivim::integration_request_to_json(request).dump(),
                              "application/json");
    if (!result) {
        std::cerr << "ivim: request to " << server_url << " failed: " << httplib::to_string(result.error()) << "\n";
        return kExitUsage;
    }
    std::cout << result->body;
    if (result->status == 200) {
        return kExitOk;
    }
    std::cerr << "ivim: server answered " << result->status << "\n";
    try {
        auto body = nlohmann::json::parse(result->body);
        if (body.contains("error")) {
            std::cerr << "error: " << body["error"].get<std::string>() << "\n";
        }
        if (body.contains("diagnosis")) {
            std::cerr << "diagnosis: " << body["diagnosis"].dump(2) << "\n";
        }
    } catch (const nlohmann::json::exception&) {
    }
    return result->status == 400 ? kExitUsage : kExitRejected;
}

int run_solve(const std::string& model_path, const std::string& constraints_path, const std::string& smt_path) {
    auto model = load_model(model_path);
    auto catalog = load_catalog(constraints_path);
    auto report = ivim::verify(model, catalog);
    if (!report.clean()) {
        print_violations(report);
        return kExitRejected;
    }
    auto problem = ivim::assemble_problem(model, catalog.all());
    if (!smt_path.empty()) {
        std::ofstream out(smt_path, std::ios::binary);
        out << ivim::export_smtlib(problem);
        if (!out) {
            std::cerr << "ivim: cannot write " << smt_path << "\n";
            return kExitUsage;
        }
    }
    if (report.complete) {
        std::cout << ivim::serialize_instance_model(model);
        return kExitOk;
    }

    ivim::SolveResult result;
    try {
        result = ivim::solve(problem);
    } catch (const ivim::SolveTimeout& e) {
        std::cerr << "ivim: " << e.what() << "\n";
        return kExitRejected;
    }
    if (result.status == ivim::SolveStatus::kUnsat) {
        std::cerr << "unsat; diagnosis:\n" << ivim::diagnosis_to_json(ivim::diagnose_unsat(problem)).dump(2) << "\n";
        return kExitRejected;
    }
    auto completed = ivim::merge_allocations(model, ivim::allocations_from_result(model, problem, result));
    auto check = ivim::verify(completed, catalog, &model);
    if (!check.clean() || !check.complete) {
        print_violations(check);
        std::cerr << "ivim: completed model does not verify\n";
        return kExitRejected;
    }
    std::cerr << "objective " << result.objective_value << " permille, " << result.stats.nodes_explored
              << " nodes, " << result.stats.duration_ms << " ms\n";
    std::cout << ivim::serialize_instance_model(completed);
    return kExitOk;
}

int run_plan(const std::string& model_path, const std::string& constraints_path, const std::string& state_path) {
    auto model = load_model(model_path);
    auto catalog = load_catalog(constraints_path);
    auto report = ivim::verify(model, catalog);
    if (!report.clean() || !report.complete) {
        print_violations(report);
        if (!report.complete) {
            std::cerr << "ivim: model is incomplete\n";
        }
        return kExitRejected;
    }
    auto desired = ivim::generate_desired_state(model, catalog);
    auto current = state_path.empty() ? ivim::init_platform(model) : ivim::parse_snapshot(ivim::read_file(state_path));
    std::cerr << ivim::desired_state_to_json(desired).dump(2) << "\n";
    std::cout << ivim::render_plan(ivim::reconcile(desired, current));
    return kExitOk;
}

int run_simulate(const std::string& scenario_path) {
    auto result = ivim::run_scenario_file(scenario_path);
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
        const auto& step = result.steps[i];
        std::cerr << "step " << i << ": " << step.label << (step.expectation_met ? "" : " (unexpected status)") << "\n";
        if (step.response) {
            if (step.response->error) {
                std::cerr << "  error: " << *step.response->error << "\n";
            }
            if (step.response->plan_rendering) {
                std::cerr << *step.response->plan_rendering;
            }
        }
        for (const auto& problem : step.invariant_violations) {
            std::cerr << "  invariant: " << problem << "\n";
        }
    }
    std::cout << ivim::snapshot(result.final_state);
    return result.ok() ? kExitOk : kExitRejected;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"In-vehicle integration manager"};
    app.require_subcommand(1);

    std::string topology, constraints, model, server, endpoint, smt, scenario, state;
    bool sim_admin = false;
    bool dry_run = false;

    auto* serve = app.add_subcommand("serve", "Run the HTTP API against a simulated platform");
    serve->add_option("--topology", topology, "Topology document (CCPs and VMs)")->required();
    serve->add_option("--constraints", constraints, "Base constraint catalog");
    serve->add_flag("--sim-admin", sim_admin, "Expose failure injection and tick endpoints");

    auto* send = app.add_subcommand("send", "POST a model to a running server");
    send->add_option("--endpoint", endpoint)->required()->check(CLI::IsMember({"configure", "optimize"}));
    send->add_option("--model", model)->required();
    send->add_option("--server", server, "Base URL, e.g. http://127.0.0.1:8080")->required();
    send->add_option("--constraints", constraints, "Runtime constraint overlay");
    send->add_flag("--dry-run", dry_run, "Plan without applying");

    auto* solve = app.add_subcommand("solve", "Verify and complete a model locally");
    solve->add_option("--model", model)->required();
    solve->add_option("--constraints", constraints, "Constraint catalog");
    solve->add_option("--emit-smt", smt, "Write the SMT-LIB encoding to this path");

    auto* plan = app.add_subcommand("plan", "Show the action plan for a complete model");
    plan->add_option("--model", model)->required();
    plan->add_option("--constraints", constraints, "Constraint catalog");
    plan->add_option("--state", state, "Platform snapshot to plan against (default: fresh platform)");

    auto* simulate = app.add_subcommand("simulate", "Run a scripted scenario and print the final snapshot");
    simulate->add_option("--scenario", scenario)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*serve) {
            return run_serve(topology, constraints, sim_admin);
        }
        if (*send) {
            return run_send(endpoint, model, server, constraints, dry_run);
        }
        if (*solve) {
            return run_solve(model, constraints, smt);
        }
        if (*plan) {
            return run_plan(model, constraints, state);
        }
        if (*simulate) {
            return run_simulate(scenario);
        }
    } catch (const ivim::Error& e) {
        std::cerr << "ivim: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
