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

#include "ivim/constraints.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "ivim/detail/json_fields.hpp"
#include "ivim/error.hpp"
#include "ivim/model.hpp"

namespace ivim {

namespace {

constexpr std::array<std::pair<ConstraintKind, std::string_view>, 7> kKindNames{{
    {ConstraintKind::kCapacity, "capacity"},
    {ConstraintKind::kSafetySegregation, "safety_segregation"},
    {ConstraintKind::kGpuAffinity, "gpu_affinity"},
    {ConstraintKind::kPinning, "pinning"},
    {ConstraintKind::kRedundancyDistinctCcp, "redundancy_distinct_ccp"},
    {ConstraintKind::kRequireVm, "require_vm"},
    {ConstraintKind::kForbidVm, "forbid_vm"},
}};

bool takes_app_vm_params(ConstraintKind kind) {
    return kind == ConstraintKind::kRequireVm || kind == ConstraintKind::kForbidVm;
}

Constraint parse_constraint(const nlohmann::json& node, const std::string& path) {
    detail::expect_object(node, path);
    detail::reject_unknown_keys(node, path, {"id", "kind", "params", "mutable_at_runtime"});
    Constraint c;
    c.id = detail::get_string(node, "id", path);
    if (!is_valid_identifier(c.id)) {
        throw SchemaError(path + ".id", "invalid identifier '" + c.id + "'");
    }
    auto kind_name = detail::get_string(node, "kind", path);
    auto kind = constraint_kind_from_string(kind_name);
    if (!kind) {
        throw UnsupportedKind(path + ".kind: unsupported constraint kind '" + kind_name + "'");
    }
    c.kind = *kind;
    c.mutable_at_runtime = detail::get_bool(node, "mutable_at_runtime", path);

    const auto& params = detail::require(node, "params", path);
    detail::expect_object(params, path + ".params");
    for (const auto& [key, value] : params.items()) {
        if (!value.is_string()) {
            throw SchemaError(path + ".params." + key, "expected a string");
        }
        c.params.emplace(key, value.get<std::string>());
    }
    if (takes_app_vm_params(c.kind)) {
        detail::reject_unknown_keys(params, path + ".params", {"app_id", "vm_id"});
        for (const char* key : {"app_id", "vm_id"}) {
            auto it = c.params.find(key);
            if (it == c.params.end() || !is_valid_identifier(it->second)) {
                throw SchemaError(path + ".params." + key, std::string(kind_name) + " requires a valid " + key);
            }
        }
    } else if (!c.params.empty()) {
        throw SchemaError(path + ".params", std::string(kind_name) + " takes no parameters");
    }
    return c;
}

void check_unique_ids(std::span<const Constraint> constraints) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (!ids.insert(constraints[i].id).second) {
            throw IntegrityError("constraints[" + std::to_string(i) + "]",
                                 "duplicate constraint id '" + constraints[i].id + "'");
        }
    }
}

} // namespace

std::string_view to_string(ConstraintKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

std::optional<ConstraintKind> constraint_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

ConstraintSet::ConstraintSet(std::vector<Constraint> base) : base_(std::move(base)) {
    check_unique_ids(base_);
}

ConstraintSet ConstraintSet::with_overlay(std::vector<Constraint> overlay) const {
    std::set<std::string> ids;
    for (const auto& c : base_) {
        ids.insert(c.id);
    }
    for (const auto& c : overlay_) {
        ids.insert(c.id);
    }
    for (const auto& c : overlay) {
        if (!c.mutable_at_runtime) {
            throw OverlayError("overlay constraint '" + c.id + "' is not mutable_at_runtime; base constraints are "
                               "fixed at development time");
        }
        if (!ids.insert(c.id).second) {
            throw OverlayError("overlay constraint '" + c.id + "' collides with an existing constraint id");
        }
    }
    ConstraintSet result = *this;
    result.overlay_.insert(result.overlay_.end(), std::make_move_iterator(overlay.begin()),
                           std::make_move_iterator(overlay.end()));
    return result;
}

std::vector<Constraint> ConstraintSet::all() const {
    std::vector<Constraint> result = base_;
    result.insert(result.end(), overlay_.begin(), overlay_.end());
    return result;
}

bool ConstraintSet::has_kind(ConstraintKind kind) const {
    auto matches = [kind](const Constraint& c) { return c.kind == kind; };
    return std::any_of(base_.begin(), base_.end(), matches) || std::any_of(overlay_.begin(), overlay_.end(), matches);
}

std::vector<Constraint> constraints_from_json(const nlohmann::json& doc) {
    detail::expect_object(doc, "");
    detail::reject_unknown_keys(doc, "", {"constraints"});
    const auto& list = detail::get_array(doc, "constraints", "");
    std::vector<Constraint> result;
    for (std::size_t i = 0; i < list.size(); ++i) {
        result.push_back(parse_constraint(list[i], "constraints[" + std::to_string(i) + "]"));
    }
    check_unique_ids(result);
    return result;
}

std::vector<Constraint> parse_constraints(std::string_view text) {
    return constraints_from_json(detail::parse_document(text));
}

nlohmann::ordered_json constraints_to_json(std::span<const Constraint> constraints) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& c : constraints) {
        nlohmann::ordered_json entry;
        entry["id"] = c.id;
        entry["kind"] = to_string(c.kind);
        entry["params"] = nlohmann::ordered_json::object();
        for (const auto& [key, value] : c.params) {
            entry["params"][key] = value;
        }
        entry["mutable_at_runtime"] = c.mutable_at_runtime;
        list.push_back(std::move(entry));
    }
    nlohmann::ordered_json doc;
    doc["constraints"] = std::move(list);
    return doc;
}

ConstraintSet default_catalog() {
    return ConstraintSet({
        {"capacity", ConstraintKind::kCapacity, {}, false},
        {"safety_segregation", ConstraintKind::kSafetySegregation, {}, false},
        {"gpu_affinity", ConstraintKind::kGpuAffinity, {}, false},
        {"pinning", ConstraintKind::kPinning, {}, false},
        {"redundancy_distinct_ccp", ConstraintKind::kRedundancyDistinctCcp, {}, false},
    });
}

} // namespace ivim
