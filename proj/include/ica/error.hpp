// Copyright 2026 The ICA Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ica {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kValidation,
  kNotFound,
  kGeneration,
  kIo,
  kTransport,
  kTimeout,
  kBudget,
  kInternal,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when (workflow_id, action_id) is absent from an action map. A model
/// emitting such an id has hallucinated it.
class ActionNotFound : public Error {
 public:
  ActionNotFound(std::string workflow_id, int action_id);

  const std::string& workflow_id() const noexcept { return workflow_id_; }
  int action_id() const noexcept { return action_id_; }

 private:
  std::string workflow_id_;
  int action_id_;
};

/// Transport or timeout failure with the pipeline stage that raised it
/// ("client", "context", "classifier").
class StageError : public Error {
 public:
  StageError(ErrorCode code, std::string stage, const std::string& message)
      : Error(code, stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ica
