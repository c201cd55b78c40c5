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

#include <sstream>

#include "ivim/plangen.hpp"

namespace ivim {

namespace {

std::string workload_name(const DeploymentAction& a) {
    if (a.replica_index == 0) {
        return a.app_id;
    }
    return a.app_id + "[" + std::to_string(a.replica_index) + "]";
}

void split_workload_name(const std::string& name, DeploymentAction& a, int line_no) {
    auto open = name.find('[');
    if (open == std::string::npos) {
        a.app_id = name;
        a.replica_index = 0;
        return;
    }
    if (name.back() != ']') {
        throw SchemaError("line " + std::to_string(line_no), "malformed workload name '" + name + "'");
    }
    a.app_id = name.substr(0, open);
    auto digits = name.substr(open + 1, name.size() - open - 2);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6) {
        throw SchemaError("line " + std::to_string(line_no), "malformed replica index in '" + name + "'");
    }
    a.replica_index = std::stoi(digits);
}

std::int64_t parse_quantity(const std::string& value, const std::string& where) {
    std::size_t used = 0;
    std::int64_t n = -1;
    try {
        n = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size() || n < 0) {
        throw SchemaError(where, "expected a non-negative integer, got '" + value + "'");
    }
    return n;
}

std::vector<std::string> split_words(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> words;
    std::string word;
    while (in >> word) {
        words.push_back(word);
    }
    return words;
}

} // namespace

std::string render_plan(const ActionPlan& plan) {
    int add = 0;
    int change = 0;
    int destroy = 0;
    std::ostringstream out;
    for (const auto& a : plan.actions) {
        switch (a.kind) {
        case ActionKind::kEnsureVmRunning:
            out << "+ vm " << a.vm_id << " on " << a.ccp_id << "\n";
            ++add;
            break;
        case ActionKind::kStopVm:
            out << "- vm " << a.vm_id << " on " << a.ccp_id << "\n";
            ++destroy;
            break;
        case ActionKind::kPullImage:
            out << "+ image " << a.image_ref << " on " << a.ccp_id << "\n";
            ++add;
            break;
        case ActionKind::kStartWorkload:
            out << "+ workload " << workload_name(a) << " on " << a.vm_id << "\n"
                << "    image          = \"" << a.image_ref << "\"\n"
                << "    active         = " << (a.active ? "true" : "false") << "\n"
                << "    cpu_millicores = " << a.demand.cpu_millicores << "\n"
                << "    ram_mb         = " << a.demand.ram_mb << "\n"
                << "    gpu_slots      = " << a.demand.gpu_slots << "\n";
            ++add;
            break;
        case ActionKind::kStopWorkload:
            out << "- workload " << workload_name(a) << " on " << a.vm_id << "\n";
            ++destroy;
            break;
        case ActionKind::kPromoteActive:
            out << "~ " << (a.active ? "active " : "standby ") << workload_name(a) << " on " << a.vm_id << "\n";
            ++change;
            break;
        }
    }
    auto totals = std::to_string(add) + " to add, " + std::to_string(change) + " to change, " +
                  std::to_string(destroy) + " to destroy.";
    if (plan.empty()) {
        return "No changes. " + totals + "\n";
    }
    out << "\nPlan: " << totals << "\n";
    return out.str();
}

ActionPlan parse_rendered_plan(std::string_view text) {
    ActionPlan plan;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto where = "line " + std::to_string(line_no);
        if (line.empty() || line.starts_with("Plan: ") || line.starts_with("No changes.")) {
            continue;
        }
        if (line.starts_with("    ")) {
            if (plan.actions.empty() || plan.actions.back().kind != ActionKind::kStartWorkload) {
                throw SchemaError(where, "attribute outside a workload block");
            }
            auto& a = plan.actions.back();
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw SchemaError(where, "expected 'name = value'");
            }
            auto words = split_words(line.substr(0, eq));
            auto value = line.substr(eq + 1);
            value.erase(0, value.find_first_not_of(' '));
            if (words.size() != 1) {
                throw SchemaError(where, "expected a single attribute name");
            }
            const auto& name = words.front();
            if (name == "image") {
                if (value.size() < 2 || value.front() != '"' || value.back() != '"') {
                    throw SchemaError(where, "image must be quoted");
                }
                a.image_ref = value.substr(1, value.size() - 2);
            } else if (name == "active") {
                if (value != "true" && value != "false") {
                    throw SchemaError(where, "active must be true or false");
                }
                a.active = value == "true";
            } else if (name == "cpu_millicores") {
                a.demand.cpu_millicores = parse_quantity(value, where);
            } else if (name == "ram_mb") {
                a.demand.ram_mb = parse_quantity(value, where);
            } else if (name == "gpu_slots") {
                a.demand.gpu_slots = parse_quantity(value, where);
            } else {
                throw SchemaError(where, "unknown attribute '" + name + "'");
            }
            continue;
        }

        auto words = split_words(line);
        if (words.size() != 5 || words[3] != "on") {
            throw SchemaError(where, "unrecognised plan line '" + line + "'");
        }
        const auto& sign = words[0];
        const auto& type = words[1];
        DeploymentAction a;
        if (type == "vm" && (sign == "+" || sign == "-")) {
            a.kind = sign == "+" ? ActionKind::kEnsureVmRunning : ActionKind::kStopVm;
            a.vm_id = words[2];
            a.ccp_id = words[4];
        } else if (type == "image" && sign == "+") {
            a.kind = ActionKind::kPullImage;
            a.image_ref = words[2];
            a.ccp_id = words[4];
        } else if (type == "workload" && (sign == "+" || sign == "-")) {
            a.kind = sign == "+" ? ActionKind::kStartWorkload : ActionKind::kStopWorkload;
            split_workload_name(words[2], a, line_no);
            a.vm_id = words[4];
        } else if ((type == "active" || type == "standby") && sign == "~") {
            a.kind = ActionKind::kPromoteActive;
            a.active = type == "active";
            split_workload_name(words[2], a, line_no);
            a.vm_id = words[4];
        } else {
            throw SchemaError(where, "unrecognised plan line '" + line + "'");
        }
        a.ordering_index = static_cast<int>(plan.actions.size());
        plan.actions.push_back(std::move(a));
    }
    return plan;
}

} // namespace ivim
