// Copyright 2026 The POWR Authors
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

// Columnar text format for transition datasets:
//
//   # powr-dataset v1
//   # env=<id> seed=<u64> policy=<tag> state_dim=<d>
//   x_1 .. x_d a x'_1 .. x'_d r done truncated
//
// one transition per line, whitespace separated, reals printed with 17
// significant digits so a write/read cycle is exact.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "powr/env/types.hpp"

namespace powr {

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_dataset(std::ostream& os, const TransitionDataset& ds) {
  const auto dim = ds.empty() ? 0 : ds.transitions.front().x.size();
  os << "# powr-dataset v1\n";
  os << "# env=" << (ds.env_id.empty() ? "-" : ds.env_id) << " seed=" << ds.seed
     << " policy=" << (ds.policy_tag.empty() ? "-" : ds.policy_tag)
     << " state_dim=" << dim << "\n";
  for (const auto& t : ds.transitions) {
    for (Eigen::Index i = 0; i < t.x.size(); ++i) os << detail::format_real(t.x(i)) << ' ';
    os << t.a << ' ';
    for (Eigen::Index i = 0; i < t.x_next.size(); ++i) {
      os << detail::format_real(t.x_next(i)) << ' ';
    }
    os << detail::format_real(t.r) << ' ' << (t.done ? 1 : 0) << ' '
       << (t.truncated ? 1 : 0) << '\n';
  }
}

inline TransitionDataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# powr-dataset v1", 0) != 0) {
    throw ArgumentError("read_dataset: missing 'powr-dataset v1' header");
  }
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw ArgumentError("read_dataset: missing metadata line");
  }
  TransitionDataset ds;
  long dim = -1;
  {
    std::istringstream meta(line.substr(2));
    std::string field;
    while (meta >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "env") ds.env_id = value == "-" ? "" : value;
      else if (key == "seed") ds.seed = std::stoull(value);
      else if (key == "policy") ds.policy_tag = value == "-" ? "" : value;
      else if (key == "state_dim") dim = std::stol(value);
    }
  }
  if (dim < 0) throw ArgumentError("read_dataset: metadata lacks state_dim");
  long lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Transition t;
    t.x.resize(dim);
    t.x_next.resize(dim);
    int done = 0, truncated = 0;
    for (long i = 0; i < dim; ++i) row >> t.x(i);
    row >> t.a;
    for (long i = 0; i < dim; ++i) row >> t.x_next(i);
    row >> t.r >> done >> truncated;
    if (!row) {
      throw ArgumentError("read_dataset: malformed row at line " + std::to_string(lineno));
    }
    t.done = done != 0;
    t.truncated = truncated != 0;
    ds.transitions.push_back(std::move(t));
  }
  return ds;
}

}  // namespace powr
