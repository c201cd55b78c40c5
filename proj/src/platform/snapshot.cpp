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

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "ivim/detail/json_fields.hpp"
#include "ivim/platform.hpp"

namespace ivim {

namespace {

using detail::get_array;
using detail::get_bool;
using detail::get_int;
using detail::get_string;
using detail::index_path;

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

nlohmann::ordered_json content_json(const PlatformState& state) {
    nlohmann::ordered_json doc;
    doc["clock"] = state.clock;
    doc["registry"] = state.registry;
    doc["ccps"] = nlohmann::ordered_json::array();
    for (const auto& ccp : state.ccps) {
        nlohmann::ordered_json c;
        c["id"] = ccp.id;
        c["alive"] = ccp.alive;
        c["image_cache"] = ccp.image_cache;
        c["vms"] = nlohmann::ordered_json::array();
        for (const auto& vm : ccp.vms) {
            nlohmann::ordered_json v;
            v["id"] = vm.vm_id;
            v["role"] = to_string(vm.role);
            v["cpu_millicores"] = vm.capacity.cpu_millicores;
            v["ram_mb"] = vm.capacity.ram_mb;
            v["gpu_slots"] = vm.capacity.gpu_slots;
            v["phase"] = to_string(vm.phase);
            v["workloads"] = nlohmann::ordered_json::array();
            for (const auto& w : vm.workloads) {
                nlohmann::ordered_json wj;
                wj["app"] = w.app_id;
                wj["replica"] = w.replica_index;
                wj["image"] = w.image_ref;
                wj["cpu_millicores"] = w.demand.cpu_millicores;
                wj["ram_mb"] = w.demand.ram_mb;
                wj["gpu_slots"] = w.demand.gpu_slots;
                wj["phase"] = to_string(w.phase);
                wj["active"] = w.active;
                v["workloads"].push_back(std::move(wj));
            }
            c["vms"].push_back(std::move(v));
        }
        doc["ccps"].push_back(std::move(c));
    }
    return doc;
}

std::set<std::string> string_set(const nlohmann::json& node, std::string_view key, const std::string& path) {
    std::set<std::string> out;
    const auto& list = get_array(node, key, path);
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_string()) {
            throw SchemaError(index_path(path, key, i), "expected a string");
        }
        out.insert(list[i].get<std::string>());
    }
    return out;
}

template <typename Enum, std::size_t N>
Enum parse_enum(const nlohmann::json& node, std::string_view key, const std::string& path,
                const std::array<Enum, N>& values) {
    auto text = get_string(node, key, path);
    for (auto value : values) {
        if (to_string(value) == text) {
            return value;
        }
    }
    throw SchemaError(detail::join_path(path, key), "unexpected value '" + text + "'");
}

} // namespace

std::string state_digest(const PlatformState& state) {
    return "sha256:" + sha256_hex(content_json(state).dump());
}

nlohmann::ordered_json snapshot_json(const PlatformState& state) {
    auto doc = content_json(state);
    doc["digest"] = state_digest(state);
    return doc;
}

std::string snapshot(const PlatformState& state) {
    return snapshot_json(state).dump(2) + "\n";
}

PlatformState snapshot_from_json(const nlohmann::json& doc) {
    const std::string root;
    detail::expect_object(doc, root);
    detail::reject_unknown_keys(doc, root, {"clock", "registry", "ccps", "digest"});
    PlatformState state;
    state.clock = static_cast<std::uint64_t>(get_int(doc, "clock", root));
    state.registry = string_set(doc, "registry", root);
    const auto& ccps = get_array(doc, "ccps", root);
    for (std::size_t i = 0; i < ccps.size(); ++i) {
        auto path = index_path(root, "ccps", i);
        const auto& cj = ccps[i];
        detail::expect_object(cj, path);
        detail::reject_unknown_keys(cj, path, {"id", "alive", "image_cache", "vms"});
        CcpState ccp;
        ccp.id = get_string(cj, "id", path);
        ccp.alive = get_bool(cj, "alive", path);
        ccp.image_cache = string_set(cj, "image_cache", path);
        const auto& vms = get_array(cj, "vms", path);
        for (std::size_t j = 0; j < vms.size(); ++j) {
            auto vpath = index_path(path, "vms", j);
            const auto& vj = vms[j];
            detail::expect_object(vj, vpath);
            detail::reject_unknown_keys(vj, vpath,
                                        {"id", "role", "cpu_millicores", "ram_mb", "gpu_slots", "phase", "workloads"});
            VmState vm;
            vm.vm_id = get_string(vj, "id", vpath);
            vm.role = parse_enum(vj, "role", vpath, std::array{VmRole::kService, VmRole::kUser});
            vm.capacity = {get_int(vj, "cpu_millicores", vpath), get_int(vj, "ram_mb", vpath),
                           get_int(vj, "gpu_slots", vpath)};
            vm.phase = parse_enum(vj, "phase", vpath, std::array{VmPhase::kStopped, VmPhase::kRunning});
            const auto& workloads = get_array(vj, "workloads", vpath);
            for (std::size_t k = 0; k < workloads.size(); ++k) {
                auto wpath = index_path(vpath, "workloads", k);
                const auto& wj = workloads[k];
                detail::expect_object(wj, wpath);
                detail::reject_unknown_keys(
                    wj, wpath, {"app", "replica", "image", "cpu_millicores", "ram_mb", "gpu_slots", "phase", "active"});
                WorkloadState w;
                w.app_id = get_string(wj, "app", wpath);
                w.replica_index = static_cast<int>(get_int(wj, "replica", wpath));
                w.image_ref = get_string(wj, "image", wpath);
                w.demand = {get_int(wj, "cpu_millicores", wpath), get_int(wj, "ram_mb", wpath),
                            get_int(wj, "gpu_slots", wpath)};
                w.phase = parse_enum(
                    wj, "phase", wpath,
                    std::array{WorkloadPhase::kPending, WorkloadPhase::kRunning, WorkloadPhase::kFailed});
                w.active = get_bool(wj, "active", wpath);
                vm.workloads.push_back(std::move(w));
            }
            ccp.vms.push_back(std::move(vm));
        }
        state.ccps.push_back(std::move(ccp));
    }
    if (doc.contains("digest")) {
        auto recorded = get_string(doc, "digest", root);
        if (recorded != state_digest(state)) {
            throw IntegrityError("digest", "snapshot digest does not match its content");
        }
    }
    return state;
}

PlatformState parse_snapshot(std::string_view text) {
    return snapshot_from_json(detail::parse_document(text));
}

} // namespace ivim
