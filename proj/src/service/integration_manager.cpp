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

#include <fstream>
#include <sstream>

#include "ivim/detail/json_fields.hpp"
#include "ivim/service.hpp"

namespace ivim {

namespace {

std::vector<std::string> image_refs(const InstanceModel& model) {
    std::vector<std::string> refs;
    for (const auto& app : model.applications) {
        refs.push_back(app.image_ref);
    }
    return refs;
}

} // namespace

IntegrationRequest parse_integration_request(std::string_view body) {
    auto doc = detail::parse_document(body);
    detail::expect_object(doc, "");
    detail::reject_unknown_keys(doc, "", {"model", "constraints", "dry_run"});
    IntegrationRequest request;
    try {
        request.model = instance_model_from_json(detail::require(doc, "model", ""));
    } catch (const SchemaError& e) {
        throw SchemaError(detail::join_path("model", e.path()), e.message());
    } catch (const IntegrityError& e) {
        throw IntegrityError(detail::join_path("model", e.path()), e.message());
    }
    if (doc.contains("constraints")) {
        request.overlay = constraints_from_json(doc["constraints"]);
    }
    if (doc.contains("dry_run")) {
        request.dry_run = detail::get_bool(doc, "dry_run", "");
    }
    return request;
}

nlohmann::ordered_json integration_request_to_json(const IntegrationRequest& request) {
    nlohmann::ordered_json doc;
    doc["model"] = instance_model_to_json(request.model);
    if (!request.overlay.empty()) {
        doc["constraints"] = constraints_to_json(request.overlay);
    }
    doc["dry_run"] = request.dry_run;
    return doc;
}

nlohmann::ordered_json apply_report_to_json(const ActionPlan& plan, const ApplyReport& report) {
    nlohmann::ordered_json doc;
    doc["outcomes"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
        const auto& outcome = report.outcomes[i];
        nlohmann::ordered_json entry;
        entry["index"] = i;
        if (i < plan.actions.size()) {
            entry["kind"] = to_string(plan.actions[i].kind);
        }
        entry["result"] = to_string(outcome.reason);
        if (!outcome.detail.empty()) {
            entry["detail"] = outcome.detail;
        }
        doc["outcomes"].push_back(std::move(entry));
    }
    doc["all_ok"] = report.all_ok();
    doc["final_state_digest"] = report.final_state_digest;
    return doc;
}

nlohmann::ordered_json response_to_json(const IntegrationResponse& response) {
    nlohmann::ordered_json doc;
    doc["status"] = response.http_status;
    doc["disposition"] = to_string(response.disposition);
    doc["verification"] = report_to_json(response.verification);
    if (response.error) {
        doc["error"] = *response.error;
    }
    if (response.completed_model) {
        doc["completed_model"] = instance_model_to_json(*response.completed_model);
    }
    if (response.solve_stats) {
        doc["solve_stats"] = solve_stats_to_json(*response.solve_stats);
    }
    if (response.diagnosis) {
        doc["diagnosis"] = diagnosis_to_json(*response.diagnosis);
    }
    if (response.desired_state) {
        doc["desired_state"] = desired_state_to_json(*response.desired_state);
    }
    if (response.plan) {
        doc["plan"] = plan_to_json(*response.plan);
    }
    if (response.plan_rendering) {
        doc["plan_rendering"] = *response.plan_rendering;
    }
    if (response.apply_report && response.plan) {
        doc["apply_report"] = apply_report_to_json(*response.plan, *response.apply_report);
    }
    return doc;
}

IntegrationManager::IntegrationManager(PlatformState initial, ConstraintSet catalog, SolveOptions options)
    : catalog_(std::move(catalog)), options_(options), state_(std::move(initial)) {}

std::optional<IntegrationResponse> IntegrationManager::resolve_constraints(const IntegrationRequest& request,
                                                                           ConstraintSet& out) const {
    try {
        out = catalog_.with_overlay(request.overlay);
        return std::nullopt;
    } catch (const OverlayError& e) {
        IntegrationResponse response;
        response.http_status = 403;
        response.disposition = Disposition::kReject;
        response.error = e.what();
        for (const auto& c : request.overlay) {
            if (!c.mutable_at_runtime) {
                response.verification.violations.push_back(
                    {c.id, {c.id}, "constraints fixed at development time cannot be supplied at runtime"});
            }
        }
        if (response.verification.violations.empty()) {
            response.verification.violations.push_back({"overlay", {"overlay"}, e.what()});
        }
        return response;
    }
}

void IntegrationManager::plan_and_apply(const InstanceModel& model, const ConstraintSet& constraints, bool dry_run,
                                        IntegrationResponse& response) {
    auto desired = generate_desired_state(model, constraints);
    // Images arrive with the request, as if pushed to the local repository.
    auto refs = image_refs(model);
    auto current = publish_images(state_, refs);
    ActionPlan plan;
    try {
        plan = reconcile(desired, current);
    } catch (const UnknownTopology& e) {
        response.http_status = 422;
        response.disposition = Disposition::kReject;
        response.error = e.what();
        response.verification.violations.push_back({"topology", {"topology"}, e.what()});
        return;
    }
    response.desired_state = desired;
    response.plan_rendering = render_plan(plan);
    if (!dry_run) {
        auto [next, report] = apply(plan, std::move(current));
        {
            std::unique_lock lock(state_mutex_);
            state_ = std::move(next);
        }
        response.apply_report = std::move(report);
    }
    response.plan = std::move(plan);
}

IntegrationResponse IntegrationManager::handle_configure(const IntegrationRequest& request) {
    ConstraintSet constraints;
    if (auto rejected = resolve_constraints(request, constraints)) {
        return *rejected;
    }
    std::lock_guard guard(integration_mutex_);
    IntegrationResponse response;
    response.verification = verify(request.model, constraints);
    response.disposition = classify_request(request.model, response.verification);
    if (response.disposition != Disposition::kGeneratePlan) {
        response.http_status = 422;
        response.error = response.verification.complete
                             ? "model violates constraints"
                             : "configuration requires a complete model; use the optimize endpoint";
        return response;
    }
    plan_and_apply(request.model, constraints, request.dry_run, response);
    return response;
}

IntegrationResponse IntegrationManager::handle_optimize(const IntegrationRequest& request) {
    ConstraintSet constraints;
    if (auto rejected = resolve_constraints(request, constraints)) {
        return *rejected;
    }
    std::lock_guard guard(integration_mutex_);
    IntegrationResponse response;
    response.verification = verify(request.model, constraints);
    response.disposition = classify_request(request.model, response.verification);
    if (response.disposition == Disposition::kReject) {
        response.http_status = 422;
        response.error = "existing allocations violate constraints";
        return response;
    }
    if (response.disposition == Disposition::kGeneratePlan) {
        response.completed_model = request.model;
        plan_and_apply(request.model, constraints, request.dry_run, response);
        return response;
    }

    const auto all = constraints.all();
    auto problem = assemble_problem(request.model, all);
    SolveResult result;
    try {
        result = solve(problem, options_);
    } catch (const SolveTimeout& e) {
        response.http_status = 503;
        response.error = e.what();
        return response;
    }
    response.solve_stats = result.stats;
    if (result.status == SolveStatus::kUnsat) {
        response.http_status = 409;
        response.disposition = Disposition::kReject;
        response.error = "no allocation satisfies the constraints";
        response.diagnosis = diagnose_unsat(problem, options_);
        return response;
    }

    auto completed = merge_allocations(request.model, allocations_from_result(request.model, problem, result));
    response.verification = verify(completed, constraints, &request.model);
    if (!response.verification.clean()) {
        response.http_status = 500;
        response.disposition = Disposition::kReject;
        response.error = "solver result failed re-verification";
        return response;
    }
    if (!response.verification.complete) {
        // Every replica is placed but a redundant app has no active one.
        response.http_status = 422;
        response.error = "all replicas are already allocated but no active replica is marked";
        return response;
    }
    plan_and_apply(completed, constraints, request.dry_run, response);
    response.completed_model = std::move(completed);
    return response;
}

std::string IntegrationManager::handle_get_state() const {
    std::shared_lock lock(state_mutex_);
    return snapshot(state_);
}

PlatformState IntegrationManager::state() const {
    std::shared_lock lock(state_mutex_);
    return state_;
}

void IntegrationManager::inject_failure(std::string_view ccp_id) {
    std::lock_guard guard(integration_mutex_);
    auto next = ivim::inject_failure(state_, ccp_id);
    std::unique_lock lock(state_mutex_);
    state_ = std::move(next);
}

void IntegrationManager::tick() {
    std::lock_guard guard(integration_mutex_);
    auto next = ivim::tick(state_);
    std::unique_lock lock(state_mutex_);
    state_ = std::move(next);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace ivim
