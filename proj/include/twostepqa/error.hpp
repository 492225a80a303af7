// Copyright 2026 The twostepqa Authors
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
#include <string_view>

namespace twostepqa {

/// Failure categories surfaced by every module.
enum class Errc {
  unsupported_format,
  corrupt_bitstream,
  zero_dimension,
  io_failure,
  invalid_argument,
  dimension_mismatch,
  image_too_small,
  degenerate_input,
  no_patches,
  non_finite,
  corpus_too_small,
  parse_error,
  missing_file,
  orphan_record,
  duplicate_record,
  missing_score,
  too_few_contents,
  singular_system,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace twostepqa
