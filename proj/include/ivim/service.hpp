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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ivim/constraints.hpp"
#include "ivim/model.hpp"
#include "ivim/plangen.hpp"
#include "ivim/platform.hpp"
#include "ivim/solver.hpp"
#include "ivim/verifier.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace ivim {

struct IntegrationRequest {
    InstanceModel model;
    std::vector<Constraint> overlay;
    bool dry_run = false;
};

/// {"model": <instance model>, "constraints": <catalog doc, optional>, "dry_run": bool, optional}.
/// Throws SchemaError / IntegrityError / UnsupportedKind on bad input.
IntegrationRequest parse_integration_request(std::string_view body);
nlohmann::ordered_json integration_request_to_json(const IntegrationRequest& request);

struct IntegrationResponse {
    int http_status = 200;
    Disposition disposition = Disposition::kReject;
    VerificationReport verification;
    std::optional<InstanceModel> completed_model;
    std::optional<DesiredState> desired_state;
    std::optional<ActionPlan> plan;
    std::optional<std::string> plan_rendering;
    std::optional<ApplyReport> apply_report;
    std::optional<SolveStats> solve_stats;
    std::optional<UnsatDiagnosis> diagnosis;
    std::optional<std::string> error;
};

nlohmann::ordered_json response_to_json(const IntegrationResponse& response);
nlohmann::ordered_json apply_report_to_json(const ActionPlan& plan, const ApplyReport& report);

/// The in-vehicle integration manager: verification, optimisation, plan
/// generation and application against one simulated platform.
///
/// Integration requests and platform mutations run one at a time under a
/// single lock, in arrival order. State reads only take a shared lock.
class IntegrationManager {
public:
    IntegrationManager(PlatformState initial, ConstraintSet catalog, SolveOptions options = {});

    IntegrationManager(const IntegrationManager&) = delete;
    IntegrationManager& operator=(const IntegrationManager&) = delete;

    /// Design-time endpoint: accepts only complete, violation-free models.
    /// Never invokes the solver.
    IntegrationResponse handle_configure(const IntegrationRequest& request);

    /// Online endpoint: completes partial models with the solver.
    IntegrationResponse handle_optimize(const IntegrationRequest& request);

    std::string handle_get_state() const;
    PlatformState state() const;

    void inject_failure(std::string_view ccp_id);
    void tick();

    const ConstraintSet& catalog() const { return catalog_; }

private:
    std::optional<IntegrationResponse> resolve_constraints(const IntegrationRequest& request,
                                                           ConstraintSet& out) const;
    void plan_and_apply(const InstanceModel& model, const ConstraintSet& constraints, bool dry_run,
                        IntegrationResponse& response);

    const ConstraintSet catalog_;
    const SolveOptions options_;
    std::mutex integration_mutex_;
    mutable std::shared_mutex state_mutex_;
    PlatformState state_;
};

/// HTTP/1.1 front end:
///   POST /api/v1/configure, POST /api/v1/optimize, GET /api/v1/state,
///   POST /api/v1/admin/fail/{ccp_id} and POST /api/v1/admin/tick (sim-admin only).
class ApiServer {
public:
    ApiServer(IntegrationManager& manager, bool sim_admin);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves on the bound socket until stop(). Blocks.
    bool serve();
    /// serve() on a background thread.
    void start();
    void stop();

private:
    IntegrationManager& manager_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

struct ListenAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// Parses "host:port". Throws Error on malformed input.
ListenAddress parse_listen_address(std::string_view text);

/// Value of IVIM_LISTEN if set, otherwise 127.0.0.1:8080.
ListenAddress listen_address_from_env();

struct ScenarioStepResult {
    std::string label;
    std::optional<IntegrationResponse> response;
    std::vector<std::string> invariant_violations;
    bool expectation_met = true;
};

struct ScenarioResult {
    std::vector<ScenarioStepResult> steps;
    PlatformState final_state;

    bool ok() const;
};

/// Runs a scripted scenario:
///   {"topology": <path|doc>, "constraints": <path|doc, optional>,
///    "steps": [{"action": "optimize"|"configure", "model": <path|doc>} |
///              {"action": "optimize"|"configure", "extend": {"applications": [...]}} |
///              {"action": "fail", "ccp": "<id>"} | {"action": "tick", "count": n}]}
/// "extend" pins every allocation of the previous step's resulting model
/// and adds the listed applications. Integration steps accept "dry_run",
/// "overlay" and "expect_status" (default 200). Paths resolve against
/// `base_dir`. Platform invariants are checked after every step and tick.
ScenarioResult run_scenario(const nlohmann::json& scenario, const std::filesystem::path& base_dir,
                            const SolveOptions& options = {});
ScenarioResult run_scenario_file(const std::filesystem::path& path, const SolveOptions& options = {});

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

} // namespace ivim
