// Copyright 2026 The coembed Authors.
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

#ifndef COEMBED_ERRORS_HPP_
#define COEMBED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace coembed {

// Malformed or inconsistent user input (files, configs, ids). Fatal for
// the command that triggered it.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands whose shapes do not line up.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical breakdown detected at runtime (NaN loss and the like).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coembed

#endif  // COEMBED_ERRORS_HPP_
