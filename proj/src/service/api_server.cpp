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

#include <cstdlib>

#include "httplib.h"
#include "ivim/service.hpp"

namespace ivim {

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    nlohmann::ordered_json body;
    body["status"] = status;
    body["error"] = message;
    send_json(res, status, body);
}

template <typename Handler>
httplib::Server::Handler integration_route(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        IntegrationRequest request;
        try {
            request = parse_integration_request(req.body);
        } catch (const Error& e) {
            send_error(res, 400, e.what());
            return;
        }
        try {
            auto response = handler(request);
            send_json(res, response.http_status, response_to_json(response));
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

} // namespace

ApiServer::ApiServer(IntegrationManager& manager, bool sim_admin)
    : manager_(manager), server_(std::make_unique<httplib::Server>()) {
    server_->Post("/api/v1/configure",
                  integration_route([this](const IntegrationRequest& r) { return manager_.handle_configure(r); }));
    server_->Post("/api/v1/optimize",
                  integration_route([this](const IntegrationRequest& r) { return manager_.handle_optimize(r); }));
    server_->Get("/api/v1/state", [this](const httplib::Request&, httplib::Response& res) {
        res.status = 200;
        res.set_content(manager_.handle_get_state(), kJson);
    });
    if (sim_admin) {
        server_->Post(R"(/api/v1/admin/fail/([A-Za-z0-9_.\-]+))",
                      [this](const httplib::Request& req, httplib::Response& res) {
                          try {
                              manager_.inject_failure(req.matches[1].str());
                          } catch (const UnknownCcp& e) {
                              send_error(res, 404, e.what());
                              return;
                          }
                          res.status = 200;
                          res.set_content(manager_.handle_get_state(), kJson);
                      });
        server_->Post("/api/v1/admin/tick", [this](const httplib::Request&, httplib::Response& res) {
            manager_.tick();
            res.status = 200;
            res.set_content(manager_.handle_get_state(), kJson);
        });
    }
}

ApiServer::~ApiServer() {
    stop();
}

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        return server_->bind_to_any_port(host);
    }
    return server_->bind_to_port(host, port) ? port : -1;
}

bool ApiServer::serve() {
    return server_->listen_after_bind();
}

void ApiServer::start() {
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void ApiServer::stop() {
    server_->stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

ListenAddress parse_listen_address(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
        throw Error("listen address must be host:port, got '" + std::string(text) + "'");
    }
    ListenAddress address;
    address.host = std::string(text.substr(0, colon));
    auto port_text = std::string(text.substr(colon + 1));
    char* end = nullptr;
    long port = std::strtol(port_text.c_str(), &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) {
        throw Error("invalid port '" + port_text + "'");
    }
    address.port = static_cast<int>(port);
    return address;
}

ListenAddress listen_address_from_env() {
    if (const char* value = std::getenv("IVIM_LISTEN"); value != nullptr && *value != '\0') {
        return parse_listen_address(value);
    }
    return {};
}

} // namespace ivim
