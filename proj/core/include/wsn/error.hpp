// Copyright 2026 The wsncollab Authors.
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

#ifndef WSN_ERROR_HPP
#define WSN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wsn {

/// Invalid user-supplied configuration (bad ranges, malformed config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model itself is numerically ill-posed (indefinite or singular covariance).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a precondition: mismatched dimensions, NaN inputs, pattern violations.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The estimator is undefined for the given mixing matrix (rank-deficient Fisher matrix).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsn

#endif  // WSN_ERROR_HPP
