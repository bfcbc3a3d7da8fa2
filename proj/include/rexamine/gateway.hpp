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

// Single access point for chat-completion and embedding endpoints that speak
// the common OpenAI-style JSON schema.
//
// Every request is identified by a CacheKey (SHA-256 over endpoint kind,
// model id and the full request payload). In record mode responses are
// written to a content-addressed cache directory before being returned; in
// replay mode only that cache is consulted and the network is never touched;
// online mode bypasses the cache entirely.
//
// Safe for concurrent use. Identical requests in flight at the same time
// share one network call, and at most `parallelism` calls run at once.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rexamine/time.hpp"

namespace rexamine {

enum class RunMode { kOnline, kRecord, kReplay };

std::string_view to_string(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view s);

struct ChatRequest {
  std::string model_id;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct ChatResponse {
  std::string text;
  // When the response was first obtained from the endpoint. Stable across
  // replays of the same cache entry.
  UtcInstant recorded_at;
  std::string cache_key;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
};

class CacheKey {
 public:
  static CacheKey of(std::string_view kind, std::string_view model_id, const nlohmann::json& payload);

  const std::string& hex() const { return hex_; }
  bool operator==(const CacheKey&) const = default;

 private:
  std::string hex_;
};

struct GatewayConfig {
  std::string api_base;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::filesystem::path cache_dir = ".rexamine-cache";
  RunMode mode = RunMode::kReplay;
  int max_retries = 3;
  std::chrono::milliseconds backoff_initial{250};
  std::chrono::milliseconds backoff_max{8000};
  std::size_t parallelism = 4;
  std::chrono::seconds request_timeout{120};
  std::string embedding_model = "text-embedding-3-small";

  // Fills api_base, api_key and cache_dir from REXAMINE_API_BASE,
  // REXAMINE_API_KEY and REXAMINE_CACHE_DIR where set.
  static GatewayConfig from_env(GatewayConfig base);
  static GatewayConfig from_env();
};

struct GatewayStats {
  std::uint64_t network_calls = 0;  // HTTP attempts, retries included
  std::uint64_t retries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_writes = 0;
};

class LlmGateway {
 public:
  explicit LlmGateway(GatewayConfig config);
  ~LlmGateway();
  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  // Errors: Transport (after bounded retries), CacheMiss (replay),
  // CredentialMissing (online/record without endpoint or key).
  ChatResponse chat(const ChatRequest& req);

  // One vector per input, order preserved, all the same length. Errors:
  // InvalidArgument (empty list or empty text), Transport, CacheMiss,
  // DimensionMismatch.
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts);

  void set_mode(RunMode mode);
  RunMode mode() const;
  const GatewayConfig& config() const;

  GatewayStats stats() const;

  // Write a cache entry as if the endpoint had returned `content`. Used to
  // author replay fixtures.
  void seed_chat_fixture(const ChatRequest& req, std::string_view content,
                         UtcInstant recorded_at = UtcInstant::reproducible_now());
  void seed_embedding_fixture(std::string_view text, std::vector<double> values,
                              UtcInstant recorded_at = UtcInstant::reproducible_now());

  // Request payloads exactly as sent on the wire.
  static nlohmann::json chat_payload(const ChatRequest& req);
  nlohmann::json embedding_payload(std::string_view text) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rexamine
