// Copyright 2026 The crowdval Authors.
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

#include <sys/types.h>

#include <filesystem>
#include <string>
#include <vector>

namespace crowdval::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void WriteFile(const std::filesystem::path& path, const std::string& content);
std::string ReadFile(const std::filesystem::path& path);

std::filesystem::path DataPath(const std::string& name);
std::string CrowdvalBin();
std::string ShellQuote(const std::string& s);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs a shell command and captures its combined output.
CommandResult RunCommand(const std::string& command);

/// `crowdval serve` in a child process on a free port.
class ServeProcess {
 public:
  ServeProcess(const std::filesystem::path& state_dir, std::vector<std::string> extra_args = {},
               std::vector<std::string> env = {});
  ~ServeProcess();

  int port() const { return port_; }
  pid_t pid() const { return pid_; }
  void Kill();                 // SIGKILL, then reap
  int Wait();                  // reap; returns exit status or -signal
  bool Alive();

 private:
  pid_t pid_ = -1;
  int port_ = -1;
};

struct HttpReply {
  int status = 0;  // 0: no connection
  std::string body;
};

HttpReply HttpGet(int port, const std::string& path);
HttpReply HttpPost(int port, const std::string& path, const std::string& json_body);

}  // namespace crowdval::test
