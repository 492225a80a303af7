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

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace twostepqa::eval {

/// One distorted image of a benchmark: its content group, the reference it
/// was derived from, its MOS and any externally computed metric scores.
struct ScoredRecord {
  std::string content_id;
  std::filesystem::path ref_path;
  std::filesystem::path dst_path;
  double mos = 0;
  std::map<std::string, double> external_scores;
};

struct Dataset {
  std::vector<ScoredRecord> records;
  /// content id -> reference image
  std::map<std::string, std::filesystem::path> references;
  /// Names of the `metric:NAME` columns in manifest order.
  std::vector<std::string> external_metrics;
};

struct IngestOptions {
  bool check_files = true;
};

// Manifest CSV (UTF-8, comma separated, '.' decimal point):
//
//   content_id,ref_path,dst_path,mos[,metric:NAME...]
//
// Every row with a dst_path is a scored record. A row with an empty dst_path
// declares the reference of its content; a record with an empty ref_path
// inherits that declaration and is an orphan if there is none. All records
// of one content must agree on the reference. Relative paths resolve
// against the manifest directory. Metric names ending in "@ref" denote
// scores of the reference image rather than the distorted one. Empty
// metric cells mean "not available".
Dataset parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                       const IngestOptions& options = {});
Dataset ingest_dataset(const std::filesystem::path& manifest_path,
                       const IngestOptions& options = {});

}  // namespace twostepqa::eval
