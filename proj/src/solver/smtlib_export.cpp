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

#include <map>
#include <set>
#include <sstream>

#include "ivim/solver.hpp"

namespace ivim {

namespace {

std::string percent_encode(std::string_view text) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) {
            out.push_back(ch);
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

// (+ a b ...) with the degenerate arities SMT-LIB does not allow folded away.
std::string sum(const std::vector<std::string>& terms) {
    if (terms.empty()) {
        return "0";
    }
    if (terms.size() == 1) {
        return terms.front();
    }
    std::string out = "(+";
    for (const auto& t : terms) {
        out += " " + t;
    }
    return out + ")";
}

} // namespace

std::string smt_variable_name(const Slot& slot, const Vm& vm) {
    return "x_" + percent_encode(slot.app_id) + std::to_string(slot.replica_index) + "_" + percent_encode(vm.id);
}

std::string export_smtlib(const AssignmentProblem& problem) {
    // var[slot][vm] for every VM in the slot's domain.
    std::vector<std::map<int, std::string>> var(problem.slots.size());
    std::set<std::string> names;
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        for (int v : problem.domains[s]) {
            auto name = smt_variable_name(problem.slots[s], problem.vms[v]);
            if (!names.insert(name).second) {
                throw Error("SMT variable name collision on " + name);
            }
            var[s].emplace(v, std::move(name));
        }
    }

    std::ostringstream out;
    out << "; ivim assignment problem: " << problem.slots.size() << " slots, " << problem.vms.size() << " VMs\n";
    out << "(set-info :smt-lib-version 2.6)\n";
    out << "(set-logic QF_LIA)\n";
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        for (const auto& [v, name] : var[s]) {
            out << "(declare-fun " << name << " () Int)\n";
        }
    }
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        for (const auto& [v, name] : var[s]) {
            out << "(assert (and (>= " << name << " 0) (<= " << name << " 1)))\n";
        }
    }

    out << "; each slot on exactly one VM\n";
    for (std::size_t s = 0; s < problem.slots.size(); ++s) {
        if (var[s].empty()) {
            out << "(assert false)\n";
            continue;
        }
        std::vector<std::string> terms;
        for (const auto& [v, name] : var[s]) {
            terms.push_back(name);
        }
        out << "(assert (= " << sum(terms) << " 1))\n";
    }

    if (!problem.capacity_rows.empty()) {
        out << "; capacity\n";
    }
    for (const auto& row : problem.capacity_rows) {
        std::vector<std::string> terms;
        for (const auto& [s, coefficient] : row.terms) {
            terms.push_back("(* " + std::to_string(coefficient) + " " + var[s].at(row.vm) + ")");
        }
        out << "(assert (<= " << sum(terms) << " " << row.limit << "))\n";
    }

    if (!problem.pinned.empty()) {
        out << "; pinned\n";
    }
    for (const auto& [s, v] : problem.pinned) {
        auto it = var[s].find(v);
        if (it != var[s].end()) {
            out << "(assert (= " << it->second << " 1))\n";
        }
    }

    if (!problem.distinct_ccp_groups.empty()) {
        out << "; replicas on distinct CCPs\n";
    }
    for (const auto& group : problem.distinct_ccp_groups) {
        std::map<std::string, std::vector<std::string>> per_ccp;
        for (int s : group) {
            for (const auto& [v, name] : var[s]) {
                per_ccp[problem.vms[v].ccp_id].push_back(name);
            }
        }
        for (const auto& [ccp, terms] : per_ccp) {
            if (terms.size() > 1) {
                out << "(assert (<= " << sum(terms) << " 1))\n";
            }
        }
    }
    out << "(check-sat)\n";
    return out.str();
}

} // namespace ivim
