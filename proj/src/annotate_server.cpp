// Copyright 2026 The rexamine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rexamine/annotate_server.hpp"

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "rexamine/error.hpp"

namespace rexamine::annotate {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"error", std::string(code)}, {"message", message}});
}

std::optional<std::string> bearer(const httplib::Request& req) {
  auto h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.size() <= kPrefix.size() || h.compare(0, kPrefix.size(), kPrefix) != 0) return std::nullopt;
  return h.substr(kPrefix.size());
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kNotAssigned: return 403;
    case ErrorCode::kUnknownReviewer:
    case ErrorCode::kUnknownReport: return 404;
    case ErrorCode::kVersionConflict: return 409;
    case ErrorCode::kCategoryMissing:
    case ErrorCode::kTotalMismatch: return 422;
    default: return 500;
  }
}

struct AnnotationServer::Impl {
  AnnotationStore& store;
  ServerConfig config;
  httplib::Server server;
  std::thread thread;

  Impl(AnnotationStore& s, ServerConfig c) : store(s), config(std::move(c)) { routes(); }

  // Returns the reviewer for a reviewer token, "" for an admin token, or
  // nullopt after writing a 401.
  std::optional<std::string> authenticate(const httplib::Request& req, httplib::Response& res) {
    auto token = bearer(req);
    if (token) {
      if (auto it = config.reviewer_tokens.find(*token); it != config.reviewer_tokens.end()) return it->second;
      if (config.admin_tokens.contains(*token)) return std::string();
    }
    send_error(res, 401, "Unauthorized", "missing or unknown bearer token");
    return std::nullopt;
  }

  template <typename F>
  void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    }
  }

  void routes() {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, json{{"status", "ok"}});
    });

    server.Get(R"(/api/queue/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto who = authenticate(req, res);
      if (!who) return;
      std::string reviewer = req.matches[1];
      if (!who->empty() && *who != reviewer) {
        send_error(res, 403, "Forbidden", "token does not belong to " + reviewer);
        return;
      }
      guarded(res, [&] {
        QueueView view = store.queue_for(reviewer);
        json items = json::array();
        for (const auto& item : view.pending) items.push_back(to_json(item));
        send_json(res, 200,
                  json{{"reviewer_id", view.reviewer_id},
                       {"assigned", view.assigned},
                       {"completed", view.completed},
                       {"items", std::move(items)}});
      });
    });

    server.Get(R"(/api/pair/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto who = authenticate(req, res);
      if (!who) return;
      if (who->empty()) {
        send_error(res, 403, "Forbidden", "pairs are served to reviewers only");
        return;
      }
      guarded(res, [&] { send_json(res, 200, to_json(store.pair_for(*who, req.matches[1]))); });
    });

    server.Post("/api/annotation", [this](const httplib::Request& req, httplib::Response& res) {
      auto who = authenticate(req, res);
      if (!who) return;
      if (who->empty()) {
        send_error(res, 403, "Forbidden", "annotations are submitted by reviewers only");
        return;
      }
      guarded(res, [&] {
        json body = json::parse(req.body);
        Submission s;
        s.annotation = annotation_from_json(body);
        if (!s.annotation.reviewer_id.empty() && s.annotation.reviewer_id != *who) {
          throw Error(ErrorCode::kInvalidArgument, "reviewer_id does not match the token");
        }
        s.annotation.reviewer_id = *who;
        if (body.contains("idempotency_key") && !body.at("idempotency_key").is_null()) {
          s.idempotency_key = body.at("idempotency_key").get<std::string>();
        }
        if (body.contains("expected_version") && !body.at("expected_version").is_null()) {
          s.expected_version = body.at("expected_version").get<std::uint64_t>();
        }
        SubmitResult r = store.submit(s);
        send_json(res, r.duplicate ? 200 : 201, json{{"version", r.version}, {"duplicate", r.duplicate}});
      });
    });

    server.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
      auto who = authenticate(req, res);
      if (!who) return;
      if (!who->empty()) {
        send_error(res, 403, "Forbidden", "export needs an admin token");
        return;
      }
      guarded(res, [&] { send_json(res, 200, to_json(store.export_annotations())); });
    });

    if (config.static_dir && !server.set_mount_point("/", config.static_dir->string())) {
      throw Error(ErrorCode::kIoError, "cannot serve static assets from " + config.static_dir->string());
    }
  }

  int bind() {
    int port = config.port == 0 ? server.bind_to_any_port(config.host)
                                : (server.bind_to_port(config.host, config.port) ? config.port : -1);
    if (port < 0) {
      throw Error(ErrorCode::kIoError, "cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    spdlog::info("annotation service listening on {}:{}", config.host, port);
    return port;
  }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start() {
  int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void AnnotationServer::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void AnnotationServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace rexamine::annotate
