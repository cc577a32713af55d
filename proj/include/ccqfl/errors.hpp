// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ccqfl {

/// Base class for all ccqfl exceptions.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid settings: bad hyperparameters, dimension constraints, M2 not
/// dividing M, infeasible partition requests.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// API misuse: out-of-range targets, length mismatches, missing angles.
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Data ingestion failures: IDX parsing, class selection, degenerate PCA.
class IngestionError : public Error {
  public:
    using Error::Error;
};

/// Wire-format and message-exchange failures: bad magic/version, truncation,
/// mismatched iteration or dimensions between peers.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

} // namespace ccqfl
