// Copyright 2026 The partgraph Authors. All Rights Reserved.
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

#ifndef PARTGRAPH_ERRORS_H_
#define PARTGRAPH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace partgraph {

// Invalid argument, shape mismatch or violated type invariant.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or truncated file payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values encountered during a numeric procedure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace partgraph

#endif  // PARTGRAPH_ERRORS_H_
