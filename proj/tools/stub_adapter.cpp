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

// Minimal scoring adapter for protocol tests.
//
//   stub_adapter --name stub --higher-better --mode echo_len
//
// Modes:
//   echo_len  score = byte length of the candidate
//   short     answer --after requests, then exit 0
//   hang      answer --after requests, then stop reading
//   crash     answer --after requests, then exit 3
//   garbage   answer --after requests, then print a non-JSON line
//   badid     answer with the wrong id

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stub scoring adapter"};
  std::string name = "stub";
  bool higher_better = false;
  std::string mode = "echo_len";
  long long after = 0;
  app.add_option("--name", name);
  app.add_flag("--higher-better", higher_better);
  app.add_option("--mode", mode)->check(CLI::IsMember({"echo_len", "short", "hang", "crash", "garbage", "badid"}));
  app.add_option("--after", after);
  CLI11_PARSE(app, argc, argv);

  std::ios::sync_with_stdio(false);
  std::string line;
  if (!std::getline(std::cin, line)) return 1;
  auto hello = nlohmann::json::parse(line, nullptr, false);
  if (hello.is_discarded() || hello.value("protocol", 0) != 1) {
    std::cerr << "unsupported handshake\n";
    return 2;
  }
  std::cout << nlohmann::json{{"name", name}, {"higher_better", higher_better}}.dump() << std::endl;

  long long answered = 0;
  while (std::getline(std::cin, line)) {
    auto req = nlohmann::json::parse(line, nullptr, false);
    if (req.is_discarded()) {
      std::cerr << "bad request line\n";
      return 2;
    }
    if (mode != "echo_len" && answered >= after) {
      if (mode == "short") return 0;
      if (mode == "crash") {
        std::cerr << "stub adapter: simulated crash\n";
        return 3;
      }
      if (mode == "garbage") {
        std::cout << "this is not json" << std::endl;
        continue;
      }
      if (mode == "hang") {
        for (;;) std::this_thread::sleep_for(std::chrono::seconds(60));
      }
    }
    long long id = req.at("id").get<long long>();
    if (mode == "badid") ++id;
    double score = static_cast<double>(req.at("candidate").get<std::string>().size());
    std::cout << nlohmann::json{{"id", id}, {"score", score}}.dump() << std::endl;
    ++answered;
  }
  return 0;
}
