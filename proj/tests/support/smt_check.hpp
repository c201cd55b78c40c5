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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// A small reader for the SMT-LIB subset the exporter emits: QF_LIA with
// Int-sorted constants, and/=/<=/>=/+/* terms, and the usual script
// commands. Anything outside that subset is reported as a syntax error.
namespace smtcheck {

struct SyntaxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Token {
    enum class Kind { kOpen, kClose, kSymbol, kKeyword, kNumeral, kString };
    Kind kind;
    std::string text;
    int line = 0;
};

std::vector<Token> tokenize(std::string_view text);

struct SExpr {
    Token atom;
    std::vector<SExpr> list;
    bool is_list = false;
};

std::vector<SExpr> parse_sexprs(std::string_view text);

struct Script {
    std::string logic;
    std::map<std::string, std::string> info;
    std::vector<std::string> declarations;  // in order
    std::vector<SExpr> assertions;
    bool has_check_sat = false;
};

// Validates the whole script and type-checks every assertion.
Script parse_script(std::string_view text);

// Evaluates every assertion under `values`; unassigned variables are 0.
// Returns the indices of assertions that evaluate to false.
std::vector<std::size_t> failing_assertions(const Script& script, const std::map<std::string, std::int64_t>& values);

}  // namespace smtcheck
