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

#include "twostepqa/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string_view>

#include "twostepqa/error.hpp"

namespace twostepqa::eval {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": unterminated quote");
  }
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

double parse_number(const std::string& text, std::size_t line_no, std::string_view column) {
  double v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": column '" +
                                       std::string(column) + "' is not a finite number: '" +
                                       text + "'");
  }
  return v;
}

}  // namespace

Dataset parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                       const IngestOptions& options) {
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_csv(line, line_no);
      break;
    }
  }
  static const std::vector<std::string> kFixed{"content_id", "ref_path", "dst_path", "mos"};
  if (header.size() < kFixed.size() ||
      !std::equal(kFixed.begin(), kFixed.end(), header.begin())) {
    throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                       ": header must start with content_id,ref_path,dst_path,mos");
  }

  Dataset ds;
  std::set<std::string> seen_metrics;
  for (std::size_t c = kFixed.size(); c < header.size(); ++c) {
    const std::string& col = header[c];
    if (col.rfind("metric:", 0) != 0 || col.size() == 7) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": column '" + col +
                                         "' must be named metric:NAME");
    }
    const std::string name = col.substr(7);
    if (!seen_metrics.insert(name).second) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                         ": duplicate metric column '" + name + "'");
    }
    ds.external_metrics.push_back(name);
  }

  struct PendingRecord {
    ScoredRecord record;
    std::size_t line_no;
    bool has_ref;
  };
  std::vector<PendingRecord> pending;
  std::map<std::string, std::size_t> ref_decl_line;
  std::set<std::filesystem::path> dst_seen;

  auto bind_reference = [&](const std::string& content, const std::filesystem::path& ref,
                            std::size_t at) {
    const auto it = ds.references.find(content);
    if (it == ds.references.end()) {
      ds.references.emplace(content, ref);
      ref_decl_line[content] = at;
    } else if (it->second != ref) {
      throw Error(Errc::parse_error, "line " + std::to_string(at) + ": content '" + content +
                                         "' already has reference " + it->second.string() +
                                         " (line " + std::to_string(ref_decl_line[content]) + ")");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto cells = split_csv(line, line_no);
    if (cells.size() != header.size()) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
    }
    const std::string& content = cells[0];
    if (content.empty()) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": empty content_id");
    }
    if (cells[2].empty()) {
      if (cells[1].empty()) {
        throw Error(Errc::parse_error, "line " + std::to_string(line_no) +
                                           ": row has neither ref_path nor dst_path");
      }
      bind_reference(content, resolve(cells[1]), line_no);
      continue;
    }

    PendingRecord pr;
    pr.line_no = line_no;
    pr.record.content_id = content;
    pr.record.dst_path = resolve(cells[2]);
    pr.record.mos = parse_number(cells[3], line_no, "mos");
    pr.has_ref = !cells[1].empty();
    if (pr.has_ref) {
      pr.record.ref_path = resolve(cells[1]);
      bind_reference(content, pr.record.ref_path, line_no);
    }
    for (std::size_t c = kFixed.size(); c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      pr.record.external_scores[ds.external_metrics[c - kFixed.size()]] =
          parse_number(cells[c], line_no, header[c]);
    }
    if (!dst_seen.insert(pr.record.dst_path.lexically_normal()).second) {
      throw Error(Errc::duplicate_record, "line " + std::to_string(line_no) +
                                              ": duplicate dst_path " +
                                              pr.record.dst_path.string());
    }
    pending.push_back(std::move(pr));
  }

  for (auto& pr : pending) {
    if (!pr.has_ref) {
      const auto it = ds.references.find(pr.record.content_id);
      if (it == ds.references.end()) {
        throw Error(Errc::orphan_record, "line " + std::to_string(pr.line_no) + ": content '" +
                                             pr.record.content_id +
                                             "' has no reference image (orphan distorted row)");
      }
      pr.record.ref_path = it->second;
    }
    if (options.check_files) {
      for (const auto* p : {&pr.record.ref_path, &pr.record.dst_path}) {
        if (!std::filesystem::exists(*p)) {
          throw Error(Errc::missing_file,
                      "line " + std::to_string(pr.line_no) + ": missing file " + p->string());
        }
      }
    }
    ds.records.push_back(std::move(pr.record));
  }
  if (ds.records.empty()) throw Error(Errc::parse_error, "manifest has no records");
  return ds;
}

Dataset ingest_dataset(const std::filesystem::path& manifest_path, const IngestOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw Error(std::filesystem::exists(manifest_path) ? Errc::io_failure : Errc::missing_file,
                "cannot open manifest " + manifest_path.string());
  }
  try {
    return parse_manifest(in, manifest_path.parent_path(), options);
  } catch (const Error& e) {
    throw Error(e.code(), manifest_path.string() + ": " + e.what());
  }
}

}  // namespace twostepqa::eval
