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

#include "ivim/detail/json_fields.hpp"
#include "ivim/service.hpp"

namespace ivim {

namespace {

nlohmann::json load_document(const nlohmann::json& ref, const std::filesystem::path& base_dir,
                             const std::string& path) {
    if (ref.is_string()) {
        auto file = base_dir / ref.get<std::string>();
        auto text = read_file(file);
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(path, file.string() + ": " + e.what());
        }
    }
    if (ref.is_object()) {
        return ref;
    }
    throw SchemaError(path, "expected a file path or an inline document");
}

// Previous model with every allocation pinned, plus new applications.
InstanceModel extend_model(InstanceModel model, const nlohmann::json& extension, const std::string& path) {
    detail::expect_object(extension, path);
    detail::reject_unknown_keys(extension, path, {"applications"});
    for (auto& alloc : model.allocations) {
        alloc.pinned = true;
    }
    auto doc = nlohmann::json::parse(instance_model_to_json(model).dump());
    for (const auto& app : detail::get_array(extension, "applications", path)) {
        doc["applications"].push_back(app);
    }
    return instance_model_from_json(doc);
}

void record_invariants(const PlatformState& state, ScenarioStepResult& step) {
    for (auto& problem : check_invariants(state)) {
        step.invariant_violations.push_back("clock " + std::to_string(state.clock) + ": " + problem);
    }
}

} // namespace

bool ScenarioResult::ok() const {
    for (const auto& step : steps) {
        if (!step.expectation_met || !step.invariant_violations.empty()) {
            return false;
        }
    }
    return true;
}

ScenarioResult run_scenario(const nlohmann::json& scenario, const std::filesystem::path& base_dir,
                            const SolveOptions& options) {
    detail::expect_object(scenario, "");
    detail::reject_unknown_keys(scenario, "", {"topology", "constraints", "steps"});
    auto topology = instance_model_from_json(load_document(detail::require(scenario, "topology", ""), base_dir, "topology"));
    ConstraintSet catalog = default_catalog();
    if (scenario.contains("constraints")) {
        catalog = ConstraintSet(constraints_from_json(load_document(scenario["constraints"], base_dir, "constraints")));
    }

    IntegrationManager manager(init_platform(topology), catalog, options);
    std::optional<InstanceModel> last_model;
    ScenarioResult result;

    const auto& steps = detail::get_array(scenario, "steps", "");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto path = "steps[" + std::to_string(i) + "]";
        const auto& step = steps[i];
        detail::expect_object(step, path);
        detail::reject_unknown_keys(step, path,
                                    {"action", "model", "extend", "dry_run", "overlay", "expect_status", "ccp", "count"});
        const auto action = detail::get_string(step, "action", path);
        ScenarioStepResult outcome;
        outcome.label = action;

        if (action == "optimize" || action == "configure") {
            IntegrationRequest request;
            if (step.contains("model") == step.contains("extend")) {
                throw SchemaError(path, "integration steps need exactly one of \"model\" or \"extend\"");
            }
            if (step.contains("model")) {
                request.model = instance_model_from_json(load_document(step["model"], base_dir, path + ".model"));
            } else {
                if (!last_model) {
                    throw SchemaError(path + ".extend", "no earlier integration step to extend");
                }
                request.model = extend_model(*last_model, step["extend"], path + ".extend");
            }
            if (step.contains("overlay")) {
                request.overlay = constraints_from_json(load_document(step["overlay"], base_dir, path + ".overlay"));
            }
            if (step.contains("dry_run")) {
                request.dry_run = detail::get_bool(step, "dry_run", path);
            }
            const int expected = step.contains("expect_status")
                                     ? static_cast<int>(detail::get_int(step, "expect_status", path))
                                     : 200;
            auto response = action == "optimize" ? manager.handle_optimize(request) : manager.handle_configure(request);
            outcome.expectation_met = response.http_status == expected;
            if (response.http_status == 200) {
                last_model = response.completed_model ? *response.completed_model : request.model;
            }
            outcome.label += " -> " + std::to_string(response.http_status);
            outcome.response = std::move(response);
            record_invariants(manager.state(), outcome);
        } else if (action == "fail") {
            const auto ccp = detail::get_string(step, "ccp", path);
            outcome.label += " " + ccp;
            manager.inject_failure(ccp);
            record_invariants(manager.state(), outcome);
        } else if (action == "tick") {
            const auto count = step.contains("count") ? detail::get_int(step, "count", path, 1) : 1;
            outcome.label += " x" + std::to_string(count);
            for (std::int64_t t = 0; t < count; ++t) {
                manager.tick();
                record_invariants(manager.state(), outcome);
            }
        } else {
            throw SchemaError(path + ".action", "unknown action '" + action + "'");
        }
        result.steps.push_back(std::move(outcome));
    }
    result.final_state = manager.state();
    return result;
}

ScenarioResult run_scenario_file(const std::filesystem::path& path, const SolveOptions& options) {
    auto text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", path.string() + ": " + e.what());
    }
    return run_scenario(doc, path.parent_path(), options);
}

} // namespace ivim
