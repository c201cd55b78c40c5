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

#include "ivim/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "ivim/detail/json_fields.hpp"
#include "ivim/error.hpp"

namespace ivim {

using detail::get_array;
using detail::get_bool;
using detail::get_int;
using detail::get_string;
using detail::index_path;

namespace {

constexpr std::int64_t kMillicoresPerCore = 1000;

std::string get_identifier(const nlohmann::json& node, std::string_view key, const std::string& path) {
    auto id = get_string(node, key, path);
    if (!is_valid_identifier(id)) {
        throw SchemaError(detail::join_path(path, key), "invalid identifier '" + id + "'");
    }
    return id;
}

VmRole parse_role(const nlohmann::json& node, const std::string& path) {
    auto role = get_string(node, "role", path);
    if (role == "service") {
        return VmRole::kService;
    }
    if (role == "user") {
        return VmRole::kUser;
    }
    throw SchemaError(detail::join_path(path, "role"), "expected \"service\" or \"user\", got \"" + role + "\"");
}

Vm parse_vm(const nlohmann::json& node, const std::string& ccp_id, const std::string& path) {
    detail::expect_object(node, path);
    detail::reject_unknown_keys(node, path, {"id", "role", "cores", "ram_mb", "safety", "gpu_access"});
    Vm vm;
    vm.id = get_identifier(node, "id", path);
    vm.ccp_id = ccp_id;
    vm.role = parse_role(node, path);
    vm.capacity.cpu_millicores = get_int(node, "cores", path, 1) * kMillicoresPerCore;
    vm.capacity.ram_mb = get_int(node, "ram_mb", path);
    vm.safety = get_bool(node, "safety", path);
    vm.gpu_access = get_bool(node, "gpu_access", path);
    vm.capacity.gpu_slots = vm.gpu_access ? 1 : 0;
    return vm;
}

Ccp parse_ccp(const nlohmann::json& node, const std::string& path) {
    detail::expect_object(node, path);
    detail::reject_unknown_keys(node, path, {"id", "vms"});
    Ccp ccp;
    ccp.id = get_identifier(node, "id", path);
    const auto& vms = get_array(node, "vms", path);
    for (std::size_t i = 0; i < vms.size(); ++i) {
        ccp.vms.push_back(parse_vm(vms[i], ccp.id, index_path(path, "vms", i)));
    }
    return ccp;
}

Application parse_application(const nlohmann::json& node, const std::string& path) {
    detail::expect_object(node, path);
    detail::reject_unknown_keys(node, path,
                                {"id", "image", "cpu_millicores", "ram_mb", "safety", "gpu", "redundancy"});
    Application app;
    app.id = get_identifier(node, "id", path);
    app.image_ref = get_string(node, "image", path);
    if (app.image_ref.empty() || app.image_ref.find_first_of(" \t\r\n\"") != std::string::npos) {
        throw SchemaError(detail::join_path(path, "image"), "image reference must be non-empty without whitespace");
    }
    app.demand.cpu_millicores = get_int(node, "cpu_millicores", path);
    app.demand.ram_mb = get_int(node, "ram_mb", path);
    app.safety = get_bool(node, "safety", path);
    app.gpu = get_bool(node, "gpu", path);
    app.demand.gpu_slots = app.gpu ? 1 : 0;
    app.redundancy = static_cast<int>(get_int(node, "redundancy", path, 1));
    return app;
}

Allocation parse_allocation(const nlohmann::json& node, const std::string& path) {
    detail::expect_object(node, path);
    detail::reject_unknown_keys(node, path, {"app", "vm", "replica", "pinned", "active"});
    Allocation alloc;
    alloc.app_id = get_identifier(node, "app", path);
    alloc.vm_id = get_identifier(node, "vm", path);
    alloc.replica_index = static_cast<int>(get_int(node, "replica", path));
    alloc.pinned = get_bool(node, "pinned", path);
    alloc.active = get_bool(node, "active", path);
    return alloc;
}

std::string allocation_path(std::size_t i) { return "allocations[" + std::to_string(i) + "]"; }

// Shared by check_integrity and merge_allocations so that both report the
// same paths for the same defects.
void check_allocations(const InstanceModel& model) {
    std::set<std::pair<std::string, int>> seen;
    std::map<std::string, int> active_count;
    for (std::size_t i = 0; i < model.allocations.size(); ++i) {
        const auto& alloc = model.allocations[i];
        auto path = allocation_path(i);
        const auto* app = model.find_app(alloc.app_id);
        if (app == nullptr) {
            throw IntegrityError(path + ".app", "unknown application '" + alloc.app_id + "'");
        }
        if (model.find_vm(alloc.vm_id) == nullptr) {
            throw IntegrityError(path + ".vm", "unknown VM '" + alloc.vm_id + "'");
        }
        if (alloc.replica_index < 0 || alloc.replica_index >= app->redundancy) {
            throw IntegrityError(path + ".replica", "replica " + std::to_string(alloc.replica_index) +
                                                        " outside [0, " + std::to_string(app->redundancy) + ")");
        }
        if (!seen.emplace(alloc.app_id, alloc.replica_index).second) {
            throw IntegrityError(path, "duplicate allocation for " + alloc.app_id + " replica " +
                                           std::to_string(alloc.replica_index));
        }
        if (app->redundancy == 1 && !alloc.active) {
            throw IntegrityError(path + ".active", "non-redundant application must be active");
        }
        if (alloc.active && ++active_count[alloc.app_id] > 1) {
            throw IntegrityError(path + ".active", "more than one active replica of '" + alloc.app_id + "'");
        }
    }
}

} // namespace

std::string_view to_string(VmRole role) {
    return role == VmRole::kService ? "service" : "user";
}

bool is_valid_identifier(std::string_view id) {
    if (id.empty()) {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

const Vm* InstanceModel::find_vm(std::string_view id) const {
    for (const auto& ccp : ccps) {
        for (const auto& vm : ccp.vms) {
            if (vm.id == id) {
                return &vm;
            }
        }
    }
    return nullptr;
}

const Ccp* InstanceModel::find_ccp(std::string_view id) const {
    for (const auto& ccp : ccps) {
        if (ccp.id == id) {
            return &ccp;
        }
    }
    return nullptr;
}

const Application* InstanceModel::find_app(std::string_view id) const {
    for (const auto& app : applications) {
        if (app.id == id) {
            return &app;
        }
    }
    return nullptr;
}

const Allocation* InstanceModel::find_allocation(std::string_view app_id, int replica_index) const {
    for (const auto& alloc : allocations) {
        if (alloc.app_id == app_id && alloc.replica_index == replica_index) {
            return &alloc;
        }
    }
    return nullptr;
}

std::vector<const Vm*> InstanceModel::vms() const {
    std::vector<const Vm*> result;
    for (const auto& ccp : ccps) {
        for (const auto& vm : ccp.vms) {
            result.push_back(&vm);
        }
    }
    return result;
}

void check_integrity(const InstanceModel& model) {
    if (model.schema_version != kSchemaVersion) {
        throw SchemaError("schema_version", "unsupported schema version '" + model.schema_version + "'");
    }
    std::set<std::string> ccp_ids;
    std::set<std::string> vm_ids;
    for (std::size_t i = 0; i < model.ccps.size(); ++i) {
        const auto& ccp = model.ccps[i];
        auto ccp_path = "ccps[" + std::to_string(i) + "]";
        if (!ccp_ids.insert(ccp.id).second) {
            throw IntegrityError(ccp_path, "duplicate CCP id '" + ccp.id + "'");
        }
        int service_vms = 0;
        for (std::size_t j = 0; j < ccp.vms.size(); ++j) {
            const auto& vm = ccp.vms[j];
            auto vm_path = index_path(ccp_path, "vms", j);
            if (!vm_ids.insert(vm.id).second) {
                throw IntegrityError(vm_path, "duplicate VM id '" + vm.id + "'");
            }
            if (vm.ccp_id != ccp.id) {
                throw IntegrityError(vm_path, "VM records CCP '" + vm.ccp_id + "' but is listed under '" + ccp.id + "'");
            }
            if (vm.capacity.cpu_millicores <= 0 || vm.capacity.cpu_millicores % kMillicoresPerCore != 0) {
                throw IntegrityError(vm_path, "CPU capacity must be a positive number of whole cores");
            }
            if (vm.capacity.ram_mb < 0 || vm.capacity.gpu_slots != (vm.gpu_access ? 1 : 0)) {
                throw IntegrityError(vm_path, "inconsistent capacity");
            }
            if (vm.role == VmRole::kService) {
                ++service_vms;
            }
        }
        if (service_vms != 1) {
            throw IntegrityError(ccp_path, "expected exactly one service VM, found " + std::to_string(service_vms));
        }
    }

    std::set<std::string> app_ids;
    for (std::size_t i = 0; i < model.applications.size(); ++i) {
        const auto& app = model.applications[i];
        auto path = "applications[" + std::to_string(i) + "]";
        if (!app_ids.insert(app.id).second) {
            throw IntegrityError(path, "duplicate application id '" + app.id + "'");
        }
        if (app.redundancy < 1) {
            throw IntegrityError(path + ".redundancy", "must be >= 1");
        }
        if (!app.demand.non_negative()) {
            throw IntegrityError(path, "negative demand");
        }
        if (app.gpu != (app.demand.gpu_slots >= 1)) {
            throw IntegrityError(path + ".gpu", "gpu flag disagrees with GPU slot demand");
        }
    }
    check_allocations(model);
}

InstanceModel instance_model_from_json(const nlohmann::json& doc) {
    const std::string root;
    detail::expect_object(doc, root);
    detail::reject_unknown_keys(doc, root, {"schema_version", "ccps", "applications", "allocations"});

    InstanceModel model;
    model.schema_version = get_string(doc, "schema_version", root);
    if (model.schema_version != kSchemaVersion) {
        throw SchemaError("schema_version", "unsupported schema version '" + model.schema_version + "'");
    }
    const auto& ccps = get_array(doc, "ccps", root);
    for (std::size_t i = 0; i < ccps.size(); ++i) {
        model.ccps.push_back(parse_ccp(ccps[i], index_path(root, "ccps", i)));
    }
    const auto& apps = get_array(doc, "applications", root);
    for (std::size_t i = 0; i < apps.size(); ++i) {
        model.applications.push_back(parse_application(apps[i], index_path(root, "applications", i)));
    }
    const auto& allocs = get_array(doc, "allocations", root);
    for (std::size_t i = 0; i < allocs.size(); ++i) {
        model.allocations.push_back(parse_allocation(allocs[i], index_path(root, "allocations", i)));
    }
    check_integrity(model);
    return model;
}

InstanceModel parse_instance_model(std::string_view text) {
    return instance_model_from_json(detail::parse_document(text));
}

nlohmann::ordered_json instance_model_to_json(const InstanceModel& model) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = model.schema_version;
    doc["ccps"] = nlohmann::ordered_json::array();
    for (const auto& ccp : model.ccps) {
        nlohmann::ordered_json c;
        c["id"] = ccp.id;
        c["vms"] = nlohmann::ordered_json::array();
        for (const auto& vm : ccp.vms) {
            nlohmann::ordered_json v;
            v["id"] = vm.id;
            v["role"] = to_string(vm.role);
            v["cores"] = vm.capacity.cpu_millicores / kMillicoresPerCore;
            v["ram_mb"] = vm.capacity.ram_mb;
            v["safety"] = vm.safety;
            v["gpu_access"] = vm.gpu_access;
            c["vms"].push_back(std::move(v));
        }
        doc["ccps"].push_back(std::move(c));
    }
    doc["applications"] = nlohmann::ordered_json::array();
    for (const auto& app : model.applications) {
        nlohmann::ordered_json a;
        a["id"] = app.id;
        a["image"] = app.image_ref;
        a["cpu_millicores"] = app.demand.cpu_millicores;
        a["ram_mb"] = app.demand.ram_mb;
        a["safety"] = app.safety;
        a["gpu"] = app.gpu;
        a["redundancy"] = app.redundancy;
        doc["applications"].push_back(std::move(a));
    }
    doc["allocations"] = nlohmann::ordered_json::array();
    for (const auto& alloc : model.allocations) {
        nlohmann::ordered_json a;
        a["app"] = alloc.app_id;
        a["vm"] = alloc.vm_id;
        a["replica"] = alloc.replica_index;
        a["pinned"] = alloc.pinned;
        a["active"] = alloc.active;
        doc["allocations"].push_back(std::move(a));
    }
    return doc;
}

std::string serialize_instance_model(const InstanceModel& model) {
    return instance_model_to_json(model).dump(2) + "\n";
}

bool is_complete(const InstanceModel& model) {
    for (const auto& app : model.applications) {
        int placed = 0;
        int active = 0;
        for (const auto& alloc : model.allocations) {
            if (alloc.app_id == app.id) {
                ++placed;
                active += alloc.active ? 1 : 0;
            }
        }
        if (placed != app.redundancy) {
            return false;
        }
        if (app.redundancy > 1 && active != 1) {
            return false;
        }
    }
    return true;
}

InstanceModel merge_allocations(const InstanceModel& model, std::span<const Allocation> additions) {
    InstanceModel merged = model;
    merged.allocations.insert(merged.allocations.end(), additions.begin(), additions.end());
    check_allocations(merged);
    return merged;
}

} // namespace ivim
