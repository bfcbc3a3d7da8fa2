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

// External metric adapters: child processes spoken to over stdin/stdout with
// newline-delimited JSON.
//
//   -> {"protocol":1}
//   <- {"name": "...", "higher_better": true|false}
//   -> {"id": 0, "candidate": "...", "reference": "..."}
//   <- {"id": 0, "score": 0.42}
//
// Responses must arrive in request order, each within the per-pair timeout.

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rexamine {

struct AdapterConfig {
  std::string name;                // expected adapter name; empty accepts any
  std::vector<std::string> argv;   // argv[0] is the executable
  std::chrono::milliseconds per_pair_timeout{60'000};
  std::chrono::milliseconds handshake_timeout{60'000};
};

struct AdapterHandshake {
  std::string name;
  bool higher_better = false;
};

using TextPair = std::pair<std::string, std::string>;  // (candidate, reference)

// One running adapter. score() calls are serialized: the child sees one
// request stream. Errors: AdapterCrashed (exit code, stderr excerpt),
// ProtocolViolation, Timeout. After any error the child is killed and the
// instance is unusable.
class AdapterProcess {
 public:
  explicit AdapterProcess(AdapterConfig config);
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  const AdapterHandshake& handshake() const { return handshake_; }

  std::vector<double> score(std::span<const TextPair> pairs);

 private:
  struct Child;
  AdapterConfig config_;
  std::unique_ptr<Child> child_;
  AdapterHandshake handshake_;
  std::mutex mu_;
  long long next_id_ = 0;
};

// Spawn, handshake, score, shut down.
std::vector<double> external_score(const AdapterConfig& config, std::span<const TextPair> pairs,
                                   AdapterHandshake* handshake_out = nullptr);

}  // namespace rexamine
