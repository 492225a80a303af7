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

#include "twostepqa/error.hpp"

namespace twostepqa {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unsupported_format: return "unsupported format";
    case Errc::corrupt_bitstream: return "corrupt bitstream";
    case Errc::zero_dimension: return "zero dimension";
    case Errc::io_failure: return "I/O failure";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::image_too_small: return "image too small";
    case Errc::degenerate_input: return "degenerate input";
    case Errc::no_patches: return "no patches";
    case Errc::non_finite: return "non-finite value";
    case Errc::corpus_too_small: return "corpus too small";
    case Errc::parse_error: return "parse error";
    case Errc::missing_file: return "missing file";
    case Errc::orphan_record: return "orphan record";
    case Errc::duplicate_record: return "duplicate record";
    case Errc::missing_score: return "missing score";
    case Errc::too_few_contents: return "too few contents";
    case Errc::singular_system: return "singular system";
  }
  return "unknown";
}

}  // namespace twostepqa
