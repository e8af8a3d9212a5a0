// Copyright 2026 The owrlab authors.
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

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "owrlab/eval/runner.hpp"

namespace owrlab {

struct ResultRow {
  std::string fingerprint, method, dg;
  std::uint16_t train_domain = 0, test_domain = 0;
  std::uint64_t seed = 0;
  std::size_t step = 0;
  double cw_no_reject = 0, cw_with_reject = 0, open_set = 0, owr_h = 0;
};

inline std::vector<ResultRow> parse_results_csv(const std::string& text,
                                                const std::string& origin) {
  std::vector<ResultRow> rows;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.rfind("fingerprint,", 0) == 0) continue;
    std::vector<std::string> f;
    std::size_t p = 0;
    while (true) {
      const std::size_t c = line.find(',', p);
      f.push_back(line.substr(p, c == std::string::npos ? std::string::npos : c - p));
      if (c == std::string::npos) break;
      p = c + 1;
    }
    if (f.size() != 11)
      throw ParseError(concat(origin, ": line ", line_no, " has ", f.size(),
                              " fields, want 11"));
    try {
      ResultRow r;
      r.fingerprint = f[0];
      r.method = f[1];
      r.dg = f[2];
      r.train_domain = static_cast<std::uint16_t>(std::stoul(f[3]));
      r.test_domain = static_cast<std::uint16_t>(std::stoul(f[4]));
      r.seed = std::stoull(f[5]);
      r.step = std::stoul(f[6]);
      r.cw_no_reject = std::stod(f[7]);
      r.cw_with_reject = std::stod(f[8]);
      r.open_set = std::stod(f[9]);
      r.owr_h = std::stod(f[10]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParseError(concat(origin, ": line ", line_no, " does not parse"));
    }
  }
  return rows;
}

// The cross-domain table: one row per (method, dg), step- and seed-averaged
// metrics per test domain.
struct ReportCell {
  double cw_no_reject = 0, cw_with_reject = 0, open_set = 0, owr_h = 0;
  std::size_t n = 0;
};

using ReportTable =
    std::map<std::pair<std::string, std::string>,  // (method, dg)
             std::map<std::uint16_t, ReportCell>>;

inline ReportTable aggregate_results(const std::vector<ResultRow>& rows) {
  ReportTable table;
  for (const ResultRow& r : rows) {
    ReportCell& cell = table[{r.method, r.dg}][r.test_domain];
    cell.cw_no_reject += r.cw_no_reject;
    cell.cw_with_reject += r.cw_with_reject;
    cell.open_set += r.open_set;
    cell.owr_h += r.owr_h;
    ++cell.n;
  }
  for (auto& [key, domains] : table)
    for (auto& [dom, cell] : domains) {
      cell.cw_no_reject /= cell.n;
      cell.cw_with_reject /= cell.n;
      cell.open_set /= cell.n;
      cell.owr_h /= cell.n;
    }
  return table;
}

inline std::string render_report_csv(const ReportTable& table) {
  std::vector<std::uint16_t> domains;
  for (const auto& [key, per_domain] : table)
    for (const auto& [dom, cell] : per_domain)
      if (std::find(domains.begin(), domains.end(), dom) == domains.end())
        domains.push_back(dom);
  std::sort(domains.begin(), domains.end());

  std::string out = "method,dg";
  for (std::uint16_t d : domains)
    out += concat(",d", d, "_cw_no_reject,d", d, "_cw_with_reject,d", d,
                  "_open_set,d", d, "_owr_h");
  out += "\n";
  char buf[64];
  for (const auto& [key, per_domain] : table) {
    out += key.first + "," + key.second;
    for (std::uint16_t d : domains) {
      const auto it = per_domain.find(d);
      if (it == per_domain.end()) {
        out += ",,,,";
        continue;
      }
      for (double v : {it->second.cw_no_reject, it->second.cw_with_reject,
                       it->second.open_set, it->second.owr_h}) {
        std::snprintf(buf, sizeof buf, ",%.6f", v);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace owrlab
