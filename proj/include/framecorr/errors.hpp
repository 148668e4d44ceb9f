/* Copyright 2026 The framecorr Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FRAMECORR_ERRORS_HPP_
#define FRAMECORR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace framecorr {

// Bad user input: malformed files, invalid parameters, mismatched shapes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frames pushed out of order into a streaming stage.
class SequenceError : public InputError {
 public:
  using InputError::InputError;
};

// An internal consistency check failed. Always a bug.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace framecorr

#endif  // FRAMECORR_ERRORS_HPP_
