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

// In-process stand-in for an OpenAI-style endpoint: /v1/chat/completions
// and /v1/embeddings with scripted replies.

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace rexamine::testing {

class FakeLlmServer {
 public:
  FakeLlmServer();
  ~FakeLlmServer();

  // "http://127.0.0.1:<port>/v1"
  std::string api_base() const;

  // Chat reply for a request body; default understands the built-in
  // prompts (standardize, inject, judge).
  void set_chat_handler(std::function<std::string(const nlohmann::json&)> fn);

  // The next n requests (either endpoint) get this status.
  void fail_next(int n, int status);

  // Embedding dimension per input index; default 8 for every input.
  void set_embedding_dims(std::function<std::size_t(std::size_t)> fn);

  // Artificial latency per request.
  void set_delay_ms(int ms) { delay_ms_ = ms; }

  int chat_calls() const { return chat_calls_; }
  int embedding_calls() const { return embedding_calls_; }
  std::vector<std::string> last_auth_headers() const;

  static std::string default_chat_reply(const nlohmann::json& body);
  static std::vector<double> embedding_for(const std::string& text, std::size_t dim);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> chat_calls_{0};
  std::atomic<int> embedding_calls_{0};
  std::atomic<int> delay_ms_{0};
};

}  // namespace rexamine::testing
