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
#include <string>
#include <string_view>
#include <vector>

#include "ivim/model.hpp"

namespace ivim {

enum class ActionKind {
    kEnsureVmRunning,
    kStopVm,
    kPullImage,
    kStartWorkload,
    kStopWorkload,
    kPromoteActive,
};

inline std::string_view to_string(ActionKind kind) {
    switch (kind) {
    case ActionKind::kEnsureVmRunning:
        return "EnsureVmRunning";
    case ActionKind::kStopVm:
        return "StopVm";
    case ActionKind::kPullImage:
        return "PullImage";
    case ActionKind::kStartWorkload:
        return "StartWorkload";
    case ActionKind::kStopWorkload:
        return "StopWorkload";
    case ActionKind::kPromoteActive:
        return "PromoteActive";
    }
    return "Unknown";
}

/// One imperative step. Which fields are meaningful depends on `kind`:
///   EnsureVmRunning / StopVm   ccp_id, vm_id
///   PullImage                  ccp_id, image_ref
///   StartWorkload              vm_id, app_id, replica_index, image_ref, demand, active
///   StopWorkload               vm_id, app_id, replica_index
///   PromoteActive              vm_id, app_id, replica_index, active (false demotes)
struct DeploymentAction {
    ActionKind kind = ActionKind::kEnsureVmRunning;
    int ordering_index = 0;
    std::string ccp_id;
    std::string vm_id;
    std::string app_id;
    int replica_index = 0;
    std::string image_ref;
    ResourceVector demand;
    bool active = false;

    bool operator==(const DeploymentAction&) const = default;
};

struct ActionPlan {
    std::vector<DeploymentAction> actions;

    bool empty() const { return actions.empty(); }

    std::map<ActionKind, int> summary() const {
        std::map<ActionKind, int> counts;
        for (const auto& action : actions) {
            ++counts[action.kind];
        }
        return counts;
    }

    int count(ActionKind kind) const {
        int n = 0;
        for (const auto& action : actions) {
            n += action.kind == kind ? 1 : 0;
        }
        return n;
    }

    bool operator==(const ActionPlan&) const = default;
};

} // namespace ivim
