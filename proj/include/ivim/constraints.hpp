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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ivim {

enum class ConstraintKind {
    kCapacity,
    kSafetySegregation,
    kGpuAffinity,
    kPinning,
    kRedundancyDistinctCcp,
    kRequireVm,
    kForbidVm,
};

std::string_view to_string(ConstraintKind kind);
std::optional<ConstraintKind> constraint_kind_from_string(std::string_view name);

struct Constraint {
    std::string id;
    ConstraintKind kind = ConstraintKind::kCapacity;
    /// require_vm / forbid_vm take "app_id" and "vm_id"; other kinds take none.
    std::map<std::string, std::string> params;
    bool mutable_at_runtime = false;

    bool operator==(const Constraint&) const = default;
};

/// Base catalog fixed at construction plus an additive runtime overlay.
/// There is no way to remove or replace a base constraint once built.
class ConstraintSet {
public:
    ConstraintSet() = default;
    explicit ConstraintSet(std::vector<Constraint> base);

    /// Copy with `overlay` appended. Throws OverlayError when an overlay entry
    /// is not mutable_at_runtime or reuses an existing id.
    ConstraintSet with_overlay(std::vector<Constraint> overlay) const;

    std::span<const Constraint> base() const { return base_; }
    std::span<const Constraint> overlay() const { return overlay_; }

    /// Base followed by overlay.
    std::vector<Constraint> all() const;

    bool has_kind(ConstraintKind kind) const;

private:
    std::vector<Constraint> base_;
    std::vector<Constraint> overlay_;
};

/// Parses a catalog document: {"constraints": [...]}.
std::vector<Constraint> parse_constraints(std::string_view text);
std::vector<Constraint> constraints_from_json(const nlohmann::json& doc);
nlohmann::ordered_json constraints_to_json(std::span<const Constraint> constraints);

/// One immutable constraint of each model-wide kind.
ConstraintSet default_catalog();

} // namespace ivim
