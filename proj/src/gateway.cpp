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

#include "rexamine/gateway.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <mutex>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "rexamine/error.hpp"
#include "rexamine/io.hpp"
#include "rexamine/text.hpp"

namespace rexamine {

using nlohmann::json;

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kOnline: return "online";
    case RunMode::kRecord: return "record";
    case RunMode::kReplay: return "replay";
  }
  return "unknown";
}

std::optional<RunMode> parse_run_mode(std::string_view s) {
  for (RunMode m : {RunMode::kOnline, RunMode::kRecord, RunMode::kReplay}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

CacheKey CacheKey::of(std::string_view kind, std::string_view model_id, const json& payload) {
  std::string material;
  material.append(kind).append("\n").append(model_id).append("\n").append(payload.dump());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  CacheKey key;
  key.hex_.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    key.hex_.push_back(kHex[digest[i] >> 4]);
    key.hex_.push_back(kHex[digest[i] & 0xF]);
  }
  return key;
}

GatewayConfig GatewayConfig::from_env(GatewayConfig base) {
  if (const char* v = std::getenv("REXAMINE_API_BASE"); v && *v) base.api_base = v;
  if (const char* v = std::getenv("REXAMINE_API_KEY"); v && *v) base.api_key = v;
  if (const char* v = std::getenv("REXAMINE_CACHE_DIR"); v && *v) base.cache_dir = v;
  return base;
}

GatewayConfig GatewayConfig::from_env() { return from_env(GatewayConfig{}); }

namespace {

struct CacheEntry {
  json request;
  json response;
  UtcInstant recorded_at;
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_base(const std::string& base) {
  auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "api base must be an http(s) URL: " + base);
  }
  auto path_start = base.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base.substr(0, path_start);
  if (path_start != std::string::npos) ep.prefix = base.substr(path_start);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  return ep;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

struct LlmGateway::Impl {
  explicit Impl(GatewayConfig c)
      : config(std::move(c)),
        mode(config.mode),
        slots(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config.parallelism, 1, 256))) {}

  GatewayConfig config;
  std::atomic<RunMode> mode;
  std::counting_semaphore<256> slots;

  std::mutex inflight_mu;
  std::unordered_map<std::string, std::shared_future<CacheEntry>> inflight;

  std::atomic<std::uint64_t> network_calls{0};
  std::atomic<std::uint64_t> retries{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> cache_writes{0};

  std::filesystem::path entry_path(const CacheKey& key) const {
    return config.cache_dir / (key.hex() + ".json");
  }

  std::optional<CacheEntry> load(const CacheKey& key, const json& request) const {
    const auto path = entry_path(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kIoError, "corrupt cache entry " + path.string() + ": " + e.what());
    }
    // A digest collision or a hand-edited fixture must not be served for a
    // different request.
    if (!j.contains("request") || j["request"] != request || !j.contains("response")) {
      throw Error(ErrorCode::kIoError, "cache entry " + path.string() + " does not match its key");
    }
    CacheEntry e;
    e.request = j["request"];
    e.response = j["response"];
    e.recorded_at = UtcInstant::parse(j.value("recorded_at", std::string("1970-01-01T00:00:00Z")));
    return e;
  }

  void store(const CacheKey& key, const CacheEntry& e) {
    json j{{"request", e.request}, {"response", e.response}, {"recorded_at", e.recorded_at.iso()}};
    io::write_file_atomic(entry_path(key), j.dump(2) + "\n");
    ++cache_writes;
  }

  void require_credentials() const {
    if (config.api_base.empty() || config.api_key.empty()) {
      throw Error(ErrorCode::kCredentialMissing,
                  "set REXAMINE_API_BASE and REXAMINE_API_KEY for online/record mode");
    }
  }

  json post_json(const std::string& path, const json& payload) {
    require_credentials();
    const Endpoint ep = split_base(config.api_base);
    const std::string body = payload.dump();
    slots.acquire();
    struct Release {
      std::counting_semaphore<256>& s;
      ~Release() { s.release(); }
    } release{slots};

    for (int attempt = 0;; ++attempt) {
      httplib::Client cli(ep.origin);
      cli.set_connection_timeout(std::chrono::seconds(10));
      cli.set_read_timeout(config.request_timeout);
      cli.set_write_timeout(config.request_timeout);
      cli.set_bearer_token_auth(config.api_key);
      ++network_calls;
      auto res = cli.Post(ep.prefix + path, body, "application/json");

      int status = res ? res->status : 0;
      std::string reason = res ? excerpt(res->body) : httplib::to_string(res.error());
      if (res && status >= 200 && status < 300) {
        try {
          return json::parse(res->body);
        } catch (const json::parse_error&) {
          throw Error(ErrorCode::kTransport, "status " + std::to_string(status) +
                                                 ": response is not JSON: " + excerpt(res->body));
        }
      }
      const bool can_retry = !res || retryable(status);
      if (!can_retry || attempt >= config.max_retries) {
        throw Error(ErrorCode::kTransport,
                    "status " + std::to_string(status) + " after " + std::to_string(attempt + 1) +
                        " attempt(s): " + reason);
      }
      auto delay = config.backoff_initial * (1LL << std::min(attempt, 20));
      delay = std::min<std::chrono::milliseconds>(delay, config.backoff_max);
      ++retries;
      spdlog::warn("llm-gateway: {} returned {} ({}); retry {}/{} in {} ms", path, status, reason,
                   attempt + 1, config.max_retries, delay.count());
      std::this_thread::sleep_for(delay);
    }
  }

  // Resolve one cache key, de-duplicating concurrent identical requests.
  template <typename Fetch>
  CacheEntry obtain(const CacheKey& key, const json& request, Fetch&& fetch) {
    const RunMode m = mode.load();
    if (m != RunMode::kOnline) {
      if (auto hit = load(key, request)) {
        ++cache_hits;
        return *hit;
      }
      if (m == RunMode::kReplay) {
        throw Error(ErrorCode::kCacheMiss, "no fixture for request " + key.hex());
      }
    }
    return share_call(key, [&] {
      CacheEntry e{request, fetch(), UtcInstant::now()};
      if (m == RunMode::kRecord) store(key, e);
      return e;
    });
  }

  // Run `call` once per key among concurrent callers; the others wait for
  // and share its result (or exception).
  template <typename Call>
  CacheEntry share_call(const CacheKey& key, Call&& call) {
    std::unique_lock lk(inflight_mu);
    if (auto it = inflight.find(key.hex()); it != inflight.end()) {
      auto shared = it->second;
      lk.unlock();
      return shared.get();
    }
    std::promise<CacheEntry> promise;
    inflight.emplace(key.hex(), promise.get_future().share());
    lk.unlock();

    auto finish = [&] {
      std::lock_guard g(inflight_mu);
      inflight.erase(key.hex());
    };
    try {
      CacheEntry e = call();
      promise.set_value(e);
      finish();
      return e;
    } catch (...) {
      promise.set_exception(std::current_exception());
      finish();
      throw;
    }
  }
};

LlmGateway::LlmGateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
LlmGateway::~LlmGateway() = default;

void LlmGateway::set_mode(RunMode mode) { impl_->mode.store(mode); }
RunMode LlmGateway::mode() const { return impl_->mode.load(); }
const GatewayConfig& LlmGateway::config() const { return impl_->config; }

GatewayStats LlmGateway::stats() const {
  return {impl_->network_calls.load(), impl_->retries.load(), impl_->cache_hits.load(),
          impl_->cache_writes.load()};
}

json LlmGateway::chat_payload(const ChatRequest& req) {
  json messages = json::array();
  if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  return json{{"model", req.model_id},
              {"messages", messages},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
}

json LlmGateway::embedding_payload(std::string_view text) const {
  return json{{"model", impl_->config.embedding_model}, {"input", std::string(text)}};
}

namespace {

std::string chat_content(const json& response) {
  try {
    const json& content = response.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kTransport, "chat response lacks choices[0].message.content: " +
                                           excerpt(response.dump()));
  }
}

std::vector<double> embedding_values(const json& item) {
  try {
    return item.at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kTransport, "embedding item lacks a numeric 'embedding' array");
  }
}

}  // namespace

ChatResponse LlmGateway::chat(const ChatRequest& req) {
  if (text::is_blank(req.user)) throw Error(ErrorCode::kInvalidArgument, "chat: user message is empty");
  const json payload = chat_payload(req);
  const CacheKey key = CacheKey::of("chat", req.model_id, payload);
  CacheEntry e = impl_->obtain(key, payload, [&] { return impl_->post_json("/chat/completions", payload); });
  return ChatResponse{chat_content(e.response), e.recorded_at, key.hex()};
}

std::vector<EmbeddingVector> LlmGateway::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kInvalidArgument, "embed: no texts");
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "embed: empty text");
  }
  const std::string& model = impl_->config.embedding_model;

  // Unique texts, first-seen order.
  std::vector<std::string> unique;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& t : texts) {
    if (slot.emplace(t, unique.size()).second) unique.push_back(t);
  }

  std::vector<std::optional<CacheEntry>> resolved(unique.size());
  std::vector<std::size_t> missing;
  const RunMode m = impl_->mode.load();
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const json req = embedding_payload(unique[i]);
    const CacheKey key = CacheKey::of("embeddings", model, req);
    if (m != RunMode::kOnline) {
      if (auto hit = impl_->load(key, req)) {
        ++impl_->cache_hits;
        resolved[i] = std::move(hit);
        continue;
      }
      if (m == RunMode::kReplay) {
        throw Error(ErrorCode::kCacheMiss, "no embedding fixture for request " + key.hex());
      }
    }
    missing.push_back(i);
  }

  if (!missing.empty()) {
    json inputs = json::array();
    for (std::size_t i : missing) inputs.push_back(unique[i]);
    const json batch{{"model", model}, {"input", inputs}};
    // Concurrent identical batches share one call. Only the per-text parts
    // are persisted; they are what later runs hit.
    const CacheKey batch_key = CacheKey::of("embeddings-batch", model, batch);
    CacheEntry e = impl_->share_call(batch_key, [&] {
      return CacheEntry{batch, impl_->post_json("/embeddings", batch), UtcInstant::now()};
    });

    const json* data = nullptr;
    if (e.response.contains("data") && e.response["data"].is_array()) data = &e.response["data"];
    if (data == nullptr || data->size() != missing.size()) {
      throw Error(ErrorCode::kTransport, "embedding response must carry one item per input");
    }
    std::vector<const json*> by_index(missing.size(), nullptr);
    for (std::size_t pos = 0; pos < data->size(); ++pos) {
      const json& item = (*data)[pos];
      std::size_t idx = item.contains("index") ? item["index"].get<std::size_t>() : pos;
      if (idx >= by_index.size() || by_index[idx] != nullptr) {
        throw Error(ErrorCode::kTransport, "embedding response has bad or repeated index");
      }
      by_index[idx] = &item;
    }
    for (std::size_t j = 0; j < missing.size(); ++j) {
      const std::size_t i = missing[j];
      const json req = embedding_payload(unique[i]);
      CacheEntry entry{req, json{{"embedding", embedding_values(*by_index[j])}}, e.recorded_at};
      if (m == RunMode::kRecord) impl_->store(CacheKey::of("embeddings", model, req), entry);
      resolved[i] = std::move(entry);
    }
  }

  std::vector<EmbeddingVector> unique_vecs;
  unique_vecs.reserve(unique.size());
  for (auto& r : resolved) {
    EmbeddingVector v{embedding_values(r->response), model};
    if (v.values.empty()) throw Error(ErrorCode::kDimensionMismatch, "provider returned an empty vector");
    for (double x : v.values) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kTransport, "provider returned a non-finite value");
    }
    if (!unique_vecs.empty() && unique_vecs.front().values.size() != v.values.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector lengths " + std::to_string(unique_vecs.front().values.size()) + " and " +
                      std::to_string(v.values.size()));
    }
    unique_vecs.push_back(std::move(v));
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(unique_vecs[slot.at(t)]);
  return out;
}

void LlmGateway::seed_chat_fixture(const ChatRequest& req, std::string_view content,
                                   UtcInstant recorded_at) {
  const json payload = chat_payload(req);
  json response{{"object", "chat.completion"},
                {"model", req.model_id},
                {"choices", json::array({json{{"index", 0},
                                              {"message", {{"role", "assistant"}, {"content", content}}},
                                              {"finish_reason", "stop"}}})}};
  impl_->store(CacheKey::of("chat", req.model_id, payload), CacheEntry{payload, response, recorded_at});
}

void LlmGateway::seed_embedding_fixture(std::string_view text, std::vector<double> values,
                                        UtcInstant recorded_at) {
  const json req = embedding_payload(text);
  impl_->store(CacheKey::of("embeddings", impl_->config.embedding_model, req),
               CacheEntry{req, json{{"embedding", std::move(values)}}, recorded_at});
}

}  // namespace rexamine
