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

#pragma once

// HTTP JSON front end for AnnotationStore.
//
//   GET  /api/health
//   GET  /api/queue/{reviewer}
//   GET  /api/pair/{report}
//   POST /api/annotation
//   GET  /api/export
//
// Every route but health needs "Authorization: Bearer <token>". Reviewer
// tokens see their own queue and pairs and may submit; admin tokens may
// export. Errors come back as {"error": <code>, "message": <text>}.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "rexamine/annotate.hpp"
#include "rexamine/error.hpp"

namespace rexamine::annotate {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::map<std::string, std::string> reviewer_tokens;  // token -> reviewer id
  std::set<std::string> admin_tokens;
  std::optional<std::filesystem::path> static_dir;  // UI assets, mounted at /
};

// HTTP status for an error code.
int http_status(ErrorCode code);

class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerConfig config);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Bind and serve on a background thread; returns the bound port. Throws
  // IoError if the address cannot be bound.
  int start();
  // Bind and serve on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rexamine::annotate
