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

#include "rexamine/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include "json.hpp"
#include "rexamine/error.hpp"

extern char** environ;

namespace rexamine {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGPIPE, &sa, nullptr);
  });
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit code " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "status " + std::to_string(status);
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

}  // namespace

struct AdapterProcess::Child {
  pid_t pid = -1;
  int in_fd = -1;
  int out_fd = -1;
  int err_fd = -1;
  std::string out_buf;
  std::string err_tail;
  bool reaped = false;
  int status = 0;
  bool broken = false;
  std::string name;

  ~Child() {
    close_fd(in_fd);
    if (pid > 0 && !reaped) {
      // Closing stdin asks the adapter to finish; give it a moment.
      auto deadline = Clock::now() + std::chrono::seconds(2);
      while (!try_reap() && Clock::now() < deadline) std::this_thread::sleep_for(std::chrono::milliseconds(5));
      if (!reaped) kill_and_reap();
    }
    close_fd(out_fd);
    close_fd(err_fd);
  }

  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }

  bool try_reap() {
    if (reaped) return true;
    int st = 0;
    pid_t r = ::waitpid(pid, &st, WNOHANG);
    if (r == pid) {
      reaped = true;
      status = st;
    }
    return reaped;
  }

  void kill_and_reap() {
    if (reaped || pid <= 0) return;
    ::kill(pid, SIGKILL);
    int st = 0;
    while (::waitpid(pid, &st, 0) < 0 && errno == EINTR) {
    }
    reaped = true;
    status = st;
  }

  void drain_stderr() {
    char buf[4096];
    for (;;) {
      ssize_t n = ::read(err_fd, buf, sizeof buf);
      if (n <= 0) break;
      err_tail.append(buf, static_cast<std::size_t>(n));
      constexpr std::size_t kKeep = 4096;
      if (err_tail.size() > kKeep) err_tail.erase(0, err_tail.size() - kKeep);
    }
  }

  std::string stderr_excerpt() {
    drain_stderr();
    constexpr std::size_t kShow = 500;
    return err_tail.size() <= kShow ? err_tail : err_tail.substr(err_tail.size() - kShow);
  }

  [[noreturn]] void fail(ErrorCode code, const std::string& why) {
    broken = true;
    kill_and_reap();
    throw Error(code, "adapter '" + name + "': " + why);
  }

  // The child went away (EOF or EPIPE). A clean exit means it stopped
  // answering; anything else is a crash.
  [[noreturn]] void child_gone(const std::string& context) {
    broken = true;
    auto deadline = Clock::now() + std::chrono::seconds(2);
    while (!try_reap() && Clock::now() < deadline) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    if (!reaped) fail(ErrorCode::kProtocolViolation, context + ": stdout closed while process still running");
    const std::string err = stderr_excerpt();
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
      throw Error(ErrorCode::kProtocolViolation, "adapter '" + name + "': " + context + ": exited cleanly");
    }
    throw Error(ErrorCode::kAdapterCrashed,
                "adapter '" + name + "': " + context + ": " + describe_status(status) + "; stderr: " + err);
  }

  void write_line(const std::string& line, Clock::time_point deadline) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      pollfd fds[2] = {{in_fd, POLLOUT, 0}, {err_fd, POLLIN, 0}};
      int r = ::poll(fds, 2, remaining_ms(deadline));
      if (r < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::kProtocolViolation, std::string("poll: ") + std::strerror(errno));
      }
      if (r == 0) fail(ErrorCode::kTimeout, "timed out writing request");
      if (fds[1].revents & (POLLIN | POLLHUP)) drain_stderr();
      if (fds[0].revents & (POLLERR | POLLHUP)) child_gone("while writing request");
      if (fds[0].revents & POLLOUT) {
        ssize_t n = ::write(in_fd, data.data() + off, data.size() - off);
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          if (errno == EPIPE) child_gone("while writing request");
          fail(ErrorCode::kProtocolViolation, std::string("write: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
      }
    }
  }

  std::string read_line(Clock::time_point deadline, const std::string& context) {
    for (;;) {
      if (auto nl = out_buf.find('\n'); nl != std::string::npos) {
        std::string line = out_buf.substr(0, nl);
        out_buf.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd fds[2] = {{out_fd, POLLIN, 0}, {err_fd, POLLIN, 0}};
      int r = ::poll(fds, 2, remaining_ms(deadline));
      if (r < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::kProtocolViolation, std::string("poll: ") + std::strerror(errno));
      }
      if (r == 0) fail(ErrorCode::kTimeout, "no response " + context + " within the timeout");
      if (fds[1].revents & (POLLIN | POLLHUP)) drain_stderr();
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[8192];
        ssize_t n = ::read(out_fd, buf, sizeof buf);
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          fail(ErrorCode::kProtocolViolation, std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) child_gone(context);
        out_buf.append(buf, static_cast<std::size_t>(n));
      }
    }
  }
};

AdapterProcess::AdapterProcess(AdapterConfig config) : config_(std::move(config)) {
  if (config_.argv.empty()) throw Error(ErrorCode::kInvalidArgument, "adapter '" + config_.name + "' has no command");
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kAdapterCrashed, std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], 2);

  std::vector<char*> argv;
  for (auto& a : config_.argv) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    throw Error(ErrorCode::kAdapterCrashed,
                "adapter '" + config_.name + "': cannot start " + config_.argv[0] + ": " + std::strerror(rc));
  }

  child_ = std::make_unique<Child>();
  child_->pid = pid;
  child_->in_fd = in_pipe[1];
  child_->out_fd = out_pipe[0];
  child_->err_fd = err_pipe[0];
  child_->name = config_.name.empty() ? config_.argv[0] : config_.name;
  for (int fd : {child_->in_fd, child_->out_fd, child_->err_fd}) {
    ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
  }

  const auto deadline = Clock::now() + config_.handshake_timeout;
  child_->write_line(json{{"protocol", 1}}.dump(), deadline);
  const std::string line = child_->read_line(deadline, "to handshake");
  json hs;
  try {
    hs = json::parse(line);
  } catch (const json::parse_error&) {
    child_->fail(ErrorCode::kProtocolViolation, "handshake reply is not JSON: " + line.substr(0, 200));
  }
  if (!hs.is_object() || !hs.contains("name") || !hs["name"].is_string() || !hs.contains("higher_better") ||
      !hs["higher_better"].is_boolean()) {
    child_->fail(ErrorCode::kProtocolViolation, "handshake must be {\"name\": str, \"higher_better\": bool}");
  }
  handshake_.name = hs["name"].get<std::string>();
  handshake_.higher_better = hs["higher_better"].get<bool>();
  if (!config_.name.empty() && handshake_.name != config_.name) {
    child_->fail(ErrorCode::kProtocolViolation,
                 "handshake names '" + handshake_.name + "', expected '" + config_.name + "'");
  }
}

AdapterProcess::~AdapterProcess() = default;

std::vector<double> AdapterProcess::score(std::span<const TextPair> pairs) {
  std::lock_guard lock(mu_);
  if (child_->broken) throw Error(ErrorCode::kProtocolViolation, "adapter '" + child_->name + "' failed earlier");
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const long long id = next_id_++;
    const auto deadline = Clock::now() + config_.per_pair_timeout;
    child_->write_line(json{{"id", id}, {"candidate", pairs[i].first}, {"reference", pairs[i].second}}.dump(),
                       deadline);
    const std::string context = "to request " + std::to_string(i + 1) + " of " + std::to_string(pairs.size());
    const std::string line = child_->read_line(deadline, context);
    json r;
    try {
      r = json::parse(line);
    } catch (const json::parse_error&) {
      child_->fail(ErrorCode::kProtocolViolation, "response is not JSON: " + line.substr(0, 200));
    }
    if (!r.is_object() || !r.contains("id") || !r["id"].is_number_integer() || !r.contains("score") ||
        !r["score"].is_number()) {
      child_->fail(ErrorCode::kProtocolViolation, "response must be {\"id\": int, \"score\": number}");
    }
    if (r["id"].get<long long>() != id) {
      child_->fail(ErrorCode::kProtocolViolation, "response id " + std::to_string(r["id"].get<long long>()) +
                                                      " out of order, expected " + std::to_string(id));
    }
    const double s = r["score"].get<double>();
    if (!std::isfinite(s)) child_->fail(ErrorCode::kProtocolViolation, "non-finite score");
    scores.push_back(s);
  }
  return scores;
}

std::vector<double> external_score(const AdapterConfig& config, std::span<const TextPair> pairs,
                                   AdapterHandshake* handshake_out) {
  AdapterProcess proc(config);
  if (handshake_out != nullptr) *handshake_out = proc.handshake();
  return proc.score(pairs);
}

}  // namespace rexamine
