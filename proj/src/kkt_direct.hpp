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

#ifndef NEUROMIP_SRC_KKT_DIRECT_HPP_
#define NEUROMIP_SRC_KKT_DIRECT_HPP_

#include <vector>

#include "neuromip/admm.hpp"

namespace neuromip {

// Unit lower-triangular factor in compressed columns (diagonal omitted), the
// pivots D and the fill-reducing permutation: P K P^T = L D L^T.
struct KktFactor::Direct {
  std::vector<int> col_ptr;
  std::vector<int> row_idx;
  std::vector<double> values;
  std::vector<double> diag;
  std::vector<int> perm;
};

}  // namespace neuromip

#endif  // NEUROMIP_SRC_KKT_DIRECT_HPP_
