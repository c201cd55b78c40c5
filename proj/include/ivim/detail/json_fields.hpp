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

// Typed field access on nlohmann::json objects that reports failures as
// SchemaError with a document path.

#include <initializer_list>
#include <string>
#include <string_view>

#include "ivim/error.hpp"
#include "json.hpp"

namespace ivim::detail {

inline std::string join_path(const std::string& base, std::string_view key) {
    if (base.empty()) {
        return std::string(key);
    }
    return base + "." + std::string(key);
}

inline std::string index_path(const std::string& base, std::string_view key, std::size_t i) {
    return join_path(base, key) + "[" + std::to_string(i) + "]";
}

inline void expect_object(const nlohmann::json& node, const std::string& path) {
    if (!node.is_object()) {
        throw SchemaError(path, "expected an object");
    }
}

inline void reject_unknown_keys(const nlohmann::json& node, const std::string& path,
                                std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (auto name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw SchemaError(join_path(path, key), "unknown field");
        }
    }
}

inline const nlohmann::json& require(const nlohmann::json& node, std::string_view key, const std::string& path) {
    auto it = node.find(key);
    if (it == node.end()) {
        throw SchemaError(join_path(path, key), "missing required field");
    }
    return *it;
}

inline std::string get_string(const nlohmann::json& node, std::string_view key, const std::string& path) {
    const auto& value = require(node, key, path);
    if (!value.is_string()) {
        throw SchemaError(join_path(path, key), "expected a string");
    }
    return value.get<std::string>();
}

inline bool get_bool(const nlohmann::json& node, std::string_view key, const std::string& path) {
    const auto& value = require(node, key, path);
    if (!value.is_boolean()) {
        throw SchemaError(join_path(path, key), "expected a boolean");
    }
    return value.get<bool>();
}

inline std::int64_t get_int(const nlohmann::json& node, std::string_view key, const std::string& path,
                            std::int64_t min_value = 0) {
    const auto& value = require(node, key, path);
    if (!value.is_number_integer()) {
        throw SchemaError(join_path(path, key), "expected an integer");
    }
    auto result = value.get<std::int64_t>();
    if (result < min_value) {
        throw SchemaError(join_path(path, key), "must be >= " + std::to_string(min_value));
    }
    return result;
}

inline const nlohmann::json& get_array(const nlohmann::json& node, std::string_view key, const std::string& path) {
    const auto& value = require(node, key, path);
    if (!value.is_array()) {
        throw SchemaError(join_path(path, key), "expected an array");
    }
    return value;
}

inline nlohmann::json parse_document(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", std::string("malformed document: ") + e.what());
    }
}

} // namespace ivim::detail
