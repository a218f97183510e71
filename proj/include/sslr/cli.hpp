/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Building blocks of the sslr command-line tool that do not need a session:
// CSV ingestion, share-file splitting and merging, config files, exit codes.

#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sslr/error.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/prg.hpp"
#include "sslr/sharing.hpp"

namespace sslr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitTransport = 3,
  kExitFormat = 4,
  kExitUnderflow = 5,
};

inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::kArgument: return kExitUsage;
    case ErrorCode::kTransport: return kExitTransport;
    case ErrorCode::kFormat: return kExitFormat;
    case ErrorCode::kRandomnessUnderflow: return kExitUnderflow;
    case ErrorCode::kProtocol: return kExitOther;
  }
  return kExitOther;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto at = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, at == std::string_view::npos ? at : at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion: header row, one sample per line, numeric features and a
// final 0/1 label column.

struct CsvOptions {
  bool has_label = true;
  std::string id_column;  // optional alignment key, excluded from features
};

struct Table {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<std::size_t> lines;  // source line of each row
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<double> x;  // rows x features, row-major
  std::vector<double> labels;
};

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

inline Table parse_csv(std::string_view text, const CsvOptions& opt = {}) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t lineno = 0, start = 0;
  while (start <= text.size()) {
    const auto at = text.find('\n', start);
    const auto line = text.substr(start, at == std::string_view::npos ? at : at - start);
    ++lineno;
    if (!trim(line).empty()) lines.emplace_back(lineno, line);
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  if (lines.empty()) fail(ErrorCode::kFormat, "CSV is empty (a header row is required)");

  const auto header = split_fields(lines[0].second);
  std::ptrdiff_t id_col = -1;
  if (!opt.id_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), opt.id_column);
    if (it == header.end()) {
      fail(ErrorCode::kFormat, "CSV header has no id column '" + opt.id_column + "'");
    }
    id_col = it - header.begin();
  }
  const std::size_t label_col = opt.has_label ? header.size() - 1 : header.size();
  if (opt.has_label && (header.size() < 2 || std::ptrdiff_t(label_col) == id_col)) {
    fail(ErrorCode::kFormat, "CSV needs at least one feature column and a final label column");
  }

  Table t;
  for (std::size_t c = 0; c < label_col; ++c) {
    if (std::ptrdiff_t(c) != id_col) t.feature_names.push_back(header[c]);
  }
  t.features = t.feature_names.size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [ln, line] = lines[i];
    const auto f = split_fields(line);
    const auto where = [&, ln = ln](std::size_t c) {
      return "line " + std::to_string(ln) + ", column " + std::to_string(c + 1) +
             (c < header.size() ? " (" + header[c] + ")" : "");
    };
    if (f.size() != header.size()) {
      fail(ErrorCode::kFormat, "line " + std::to_string(ln) + ": expected " +
                                   std::to_string(header.size()) + " fields, found " +
                                   std::to_string(f.size()));
    }
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (std::ptrdiff_t(c) == id_col) {
        t.ids.push_back(f[c]);
        continue;
      }
      double v = 0;
      if (!parse_double(f[c], v)) fail(ErrorCode::kFormat, where(c) + ": '" + f[c] + "' is not a number");
      if (c == label_col) {
        if (v != 0.0 && v != 1.0) fail(ErrorCode::kFormat, where(c) + ": label must be 0 or 1, got " + f[c]);
        t.labels.push_back(v);
      } else {
        t.x.push_back(v);
      }
    }
    t.lines.push_back(ln);
    ++t.rows;
  }
  if (id_col >= 0) {
    // Sort samples by id so column-subset files from different owners align.
    std::vector<std::size_t> order(t.rows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return t.ids[a] < t.ids[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (t.ids[order[i]] == t.ids[order[i - 1]]) {
        fail(ErrorCode::kFormat, "duplicate id '" + t.ids[order[i]] + "'");
      }
    }
    Table s = t;
    for (std::size_t i = 0; i < t.rows; ++i) {
      const std::size_t r = order[i];
      s.ids[i] = t.ids[r];
      s.lines[i] = t.lines[r];
      std::copy_n(t.x.begin() + r * t.features, t.features, s.x.begin() + i * t.features);
      if (opt.has_label) s.labels[i] = t.labels[r];
    }
    t = std::move(s);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Splitting: [1 | features | label] per row (ones and label optional),
// encoded and split into two uniformly random share matrices.

struct SplitOptions {
  bool ones_column = true;
};

struct SplitResult {
  ShareFileHeader header;
  std::vector<RingElement> a;
  std::vector<RingElement> b;
};

inline SplitResult split_table(const Table& t, const FixedPointParams& fp, const Seed& seed,
                               const SplitOptions& opt = {}) {
  fp.validate();
  SplitResult out;
  out.header.params = fp;
  out.header.rows = t.rows;
  out.header.cols = t.features + (opt.ones_column ? 1 : 0) + (t.labels.empty() ? 0 : 1);
  const Ring ring = fp.ring();
  Prg prg(seed);
  const auto put = [&](double v, std::size_t row, const std::string& col) {
    RingElement e = 0;
    try {
      e = encode(v, fp);
    } catch (const Error& err) {
      const std::string where = row < t.lines.size() ? "line " + std::to_string(t.lines[row])
                                                      : "row " + std::to_string(row + 1);
      fail(ErrorCode::kFormat, where + ", column '" + col + "': " + err.what());
    }
    const auto [sa, sb] = split(e, ring, prg);
    out.a.push_back(sa.value);
    out.b.push_back(sb.value);
  };
  for (std::size_t r = 0; r < t.rows; ++r) {
    if (opt.ones_column) put(1.0, r, "(ones)");
    for (std::size_t c = 0; c < t.features; ++c) put(t.x[r * t.features + c], r, t.feature_names[c]);
    if (!t.labels.empty()) put(t.labels[r], r, "label");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Merging one party's share files from several owners.

struct ShareFile {
  ShareFileHeader header;
  std::vector<RingElement> words;
};

inline ShareFile merge_rows(const std::vector<ShareFile>& parts) {
  if (parts.empty()) fail(ErrorCode::kArgument, "nothing to merge");
  ShareFile out{parts[0].header, {}};
  out.header.rows = 0;
  for (const auto& p : parts) {
    if (p.header.params != out.header.params || p.header.cols != out.header.cols) {
      fail(ErrorCode::kFormat, "row merge needs equal parameters and column counts");
    }
    out.header.rows += p.header.rows;
    out.words.insert(out.words.end(), p.words.begin(), p.words.end());
  }
  return out;
}

inline ShareFile merge_columns(const std::vector<ShareFile>& parts) {
  if (parts.empty()) fail(ErrorCode::kArgument, "nothing to merge");
  ShareFile out{parts[0].header, {}};
  out.header.cols = 0;
  for (const auto& p : parts) {
    if (p.header.params != out.header.params || p.header.rows != out.header.rows) {
      fail(ErrorCode::kFormat, "column merge needs equal parameters and row counts");
    }
    out.header.cols += p.header.cols;
  }
  out.words.reserve(out.header.rows * out.header.cols);
  for (std::size_t r = 0; r < out.header.rows; ++r) {
    for (const auto& p : parts) {
      const auto row = p.words.begin() + static_cast<std::ptrdiff_t>(r * p.header.cols);
      out.words.insert(out.words.end(), row, row + static_cast<std::ptrdiff_t>(p.header.cols));
    }
  }
  return out;
}

// Opens two share files into decoded reals.
inline std::vector<double> reconstruct(const ShareFile& a, const ShareFile& b) {
  if (!(a.header == b.header)) {
    const auto& x = a.header;
    const auto& y = b.header;
    fail(ErrorCode::kFormat,
         "share headers differ: lambda " + std::to_string(x.params.ring_bits) + "/" +
             std::to_string(y.params.ring_bits) + ", a " + std::to_string(x.params.frac_bits) +
             "/" + std::to_string(y.params.frac_bits) + ", b " +
             std::to_string(x.params.int_bits) + "/" + std::to_string(y.params.int_bits) +
             ", dims " + std::to_string(x.rows) + "x" + std::to_string(x.cols) + "/" +
             std::to_string(y.rows) + "x" + std::to_string(y.cols));
  }
  const auto v = open(std::span<const RingElement>(a.words), b.words, a.header.params.ring());
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = decode(v[i], a.header.params);
  return out;
}

// One row per matrix row. %.17g keeps every fixed-point value exact.
inline std::string format_csv(std::span<const double> v, std::size_t cols) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out += buf;
    out += (cols == 0 || (i + 1) % cols == 0) ? '\n' : ',';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config files: flat "key = value" lines, '#' comments. Keys mirror the
// long flag names. Command-line flags win.

inline std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kArgument, "config line " + std::to_string(n) + ": expected key=value");
    }
    std::string key(trim(body.substr(0, eq)));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) fail(ErrorCode::kArgument, "config line " + std::to_string(n) + ": empty key");
    out.emplace_back(std::move(key), std::string(trim(body.substr(eq + 1))));
  }
  return out;
}

// Appends "--key=value" for every config entry whose flag is absent from args.
inline std::vector<std::string> merge_config(std::vector<std::string> args,
                                             const std::vector<std::pair<std::string, std::string>>& kv) {
  const auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& [k, v] : kv) {
    if (!given(k)) extra.push_back("--" + k + "=" + v);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace sslr::cli
