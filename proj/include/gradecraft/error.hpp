// Copyright 2026 The Gradecraft Authors
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

namespace gradecraft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed board coordinate, edition tag or other textual token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string token)
      : Error(message), token_(std::move(token)) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class UnsupportedGradeError : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyRouteError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its cap; carries the objective at the last pass.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double last_objective)
      : Error(message), last_objective_(last_objective) {}
  double last_objective() const noexcept { return last_objective_; }

 private:
  double last_objective_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, int epoch)
      : Error(message), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class UnsupportedExportError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public Error {
 public:
  UnsupportedVersionError(const std::string& message, int version)
      : Error(message), version_(version) {}
  int version() const noexcept { return version_; }

 private:
  int version_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gradecraft
