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

#include <stdexcept>
#include <string>

namespace crowdval {

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kUsage = 2,
  kData = 3,
  kBackend = 4,
  kInternal = 5,
};

/// Base exception for everything thrown by the library. `module` names the
/// component that raised it so the CLI can render "module: message".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

class DataError : public Error {
 public:
  DataError(std::string module, const std::string& message)
      : Error(ErrorKind::kData, std::move(module), message) {}
};

class BackendError : public Error {
 public:
  BackendError(std::string module, const std::string& message)
      : Error(ErrorKind::kBackend, std::move(module), message) {}
};

class UsageError : public Error {
 public:
  UsageError(std::string module, const std::string& message)
      : Error(ErrorKind::kUsage, std::move(module), message) {}
};

}  // namespace crowdval
