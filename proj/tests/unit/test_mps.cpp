// Copyright 2026 The neuromip Authors
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

#include <random>

#include "doctest.h"
#include "neuromip/mps_io.hpp"
#include "test_util.hpp"

using namespace neuromip;

namespace {

constexpr const char* kSmall = R"(NAME          SMALL
ROWS
 N  COST
 L  LIM1
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    X1        COST         1.0   LIM1         1.0
    MARKER                 'MARKER'                 'INTEND'
    X2        COST         2.0   LIM1         1.0
RHS
    RHS       LIM1         4.0   COST        -1.5
BOUNDS
 UP BND       X2           3.0
ENDATA
)";

}  // namespace

TEST_CASE("parse small MPS with integer marker") {
  const MipInstance m = parse_mps(kSmall);
  CHECK(m.name == "SMALL");
  CHECK(m.num_vars == 2);
  CHECK(m.num_cons == 1);
  CHECK(m.integer_set() == std::vector<int>{0});
  CHECK(m.var_kind[0] == VarKind::kBinary);  // INTORG default bounds [0, 1]
  CHECK(m.var_upper[0] == 1.0);
  CHECK(m.var_upper[1] == 3.0);
  CHECK(m.row_lower[0] == -kInf);
  CHECK(m.row_upper[0] == 4.0);
  CHECK(m.objective_offset == 1.5);
  CHECK(m.objective == std::vector<double>{1.0, 2.0});
  CHECK(validate(m).ok());
}

TEST_CASE("bound codes") {
  const std::string text = R"(NAME B
ROWS
 N obj
 G r1
COLUMNS
 x1 obj 1 r1 1
 x2 obj 1 r1 1
 x3 obj 1 r1 1
 x4 obj 1 r1 1
 x5 obj 1 r1 1
RHS
 rhs r1 1
BOUNDS
 BV BND x1
 MI BND x2
 UP BND x2 5
 FX BND x3 2.5
 UP BND x4 -2
 UI BND x5 9
 LI BND x5 -3
ENDATA
)";
  const MipInstance m = parse_mps(text);
  CHECK(m.var_kind[0] == VarKind::kBinary);
  CHECK(m.var_lower[0] == 0.0);
  CHECK(m.var_upper[0] == 1.0);
  CHECK(m.var_lower[1] == -kInf);
  CHECK(m.var_upper[1] == 5.0);
  CHECK(m.var_lower[2] == 2.5);
  CHECK(m.var_upper[2] == 2.5);
  CHECK(m.var_lower[3] == -kInf);
  CHECK(m.var_upper[3] == -2.0);
  CHECK(m.var_kind[4] == VarKind::kInteger);
  CHECK(m.var_lower[4] == -3.0);
  CHECK(m.var_upper[4] == 9.0);
}

TEST_CASE("ranges follow MPS semantics") {
  // Expected intervals worked out from the MPS RANGES table:
  // L: [b - |R|, b], G: [b, b + |R|], E with R > 0: [b, b + R], R < 0: [b + R, b].
  const std::string text = R"(NAME R
ROWS
 N obj
 L rl
 G rg
 E re
 E rn
COLUMNS
 x obj 1 rl 1
 x rg 1 re 1
 x rn 1
RHS
 rhs rl 10 rg 2
 rhs re 5 rn 5
RANGES
 rng rl 4 rg -3
 rng re 2 rn -2
ENDATA
)";
  const MipInstance m = parse_mps(text);
  CHECK(m.row_lower == std::vector<double>{6.0, 2.0, 5.0, 3.0});
  CHECK(m.row_upper == std::vector<double>{10.0, 5.0, 7.0, 5.0});
}

TEST_CASE("objective sense max negates") {
  const std::string text = "NAME S\nOBJSENSE\n    MAX\nROWS\n N obj\nCOLUMNS\n x obj 2\nENDATA\n";
  const MipInstance m = parse_mps(text);
  CHECK(m.objective[0] == -2.0);
}

TEST_CASE("parse errors carry line numbers") {
  auto line_of = [](const std::string& t) {
    try {
      parse_mps(t);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("NAME A\nROWS\n N obj\nFOO\nENDATA\n") == 4);
  CHECK(line_of("NAME A\nROWS\n N obj\nCOLUMNS\n x zz 1\nENDATA\n") == 5);
  CHECK(line_of("NAME A\nROWS\n N obj\nCOLUMNS\n x obj 1.2.3\nENDATA\n") == 5);
  CHECK(line_of("NAME A\nROWS\n N obj\nCOLUMNS\n M 'MARKER' 'INTORG'\n x obj 1\nRHS\nENDATA\n") == 7);
  CHECK(line_of("NAME A\nROWS\n N obj\nCOLUMNS\n x obj 1\n") > 0);
}

TEST_CASE("parse is whitespace-insensitive") {
  std::string tabs = kSmall;
  for (auto& ch : tabs) {
    if (ch == ' ') ch = '\t';
  }
  // Header lines must still start in column one.
  CHECK(parse_mps(tabs) == parse_mps(kSmall));
}

TEST_CASE("canonical JSON round-trips") {
  const MipInstance small = parse_mps(kSmall);
  CHECK(read_canonical(write_canonical(small)) == small);

  MipBuilder e("empty");
  e.add_var(-kInf, kInf, 0.1);
  const MipInstance empty = e.build();
  CHECK(read_canonical(write_canonical(empty)) == empty);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const MipInstance m = testing::random_binary_mip(rng, 1 + t % 9, t % 5);
    MipInstance mm = m;
    for (double& c : mm.objective) c = c / 3.0 + 1e-17 * t;
    mm.objective_offset = 1.0 / 7.0;
    CHECK(read_canonical(write_canonical(mm)) == mm);
  }

  auto doc = to_json(small);
  doc["version"] = 99;
  CHECK_THROWS_AS(mip_from_json(doc), DataError);
}
