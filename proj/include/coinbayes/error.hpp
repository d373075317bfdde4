// Copyright 2026 The coinbayes Authors
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

namespace coinbayes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Every outcome in a support received zero probability mass.
class ZeroSupportError : public Error {
 public:
  ZeroSupportError() : Error("model assigns no mass to any outcome") {}
};

/// A sample statistic is undefined because an input has zero variance.
class ZeroVarianceError : public Error {
 public:
  using Error::Error;
};

/// Failures talking to a token-logprob provider.
class ProviderError : public Error {
 public:
  using Error::Error;
  virtual const char* kind() const noexcept { return "provider"; }
};

class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
  const char* kind() const noexcept override { return "transport"; }
};

class MalformedResponseError : public ProviderError {
 public:
  using ProviderError::ProviderError;
  const char* kind() const noexcept override { return "malformed_response"; }
};

/// Bad experiment configuration; maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace coinbayes
