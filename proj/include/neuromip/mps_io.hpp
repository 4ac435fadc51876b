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

#ifndef NEUROMIP_MPS_IO_HPP_
#define NEUROMIP_MPS_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "neuromip/mip.hpp"

namespace neuromip {

inline constexpr int kCanonicalVersion = 1;

class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Reads free-format MPS (fixed-format files without blanks in names parse
// identically). Conventions:
//   * the first N row is the objective, further N rows are dropped;
//   * an RHS entry on the objective row r gives objective_offset = -r;
//   * variables inside INTORG/INTEND markers default to [0, 1];
//   * an UP bound below zero on a variable with lower bound 0 makes the lower
//     bound -inf;
//   * OBJSENSE MAX negates the objective so the instance is a minimization.
MipInstance parse_mps(std::string_view text);
MipInstance read_mps_file(const std::filesystem::path& path);

// Canonical JSON document (format "neuromip.mip", version 1). Infinite
// bounds are written as the strings "inf" and "-inf"; finite values are
// written with round-trip precision.
nlohmann::json to_json(const MipInstance& instance);
MipInstance mip_from_json(const nlohmann::json& doc);
std::string write_canonical(const MipInstance& instance);
MipInstance read_canonical(std::string_view text);

nlohmann::json to_json(const Assignment& assignment);
Assignment assignment_from_json(const nlohmann::json& doc);

// Encodes +-inf as strings; leaves finite values as numbers.
nlohmann::json encode_real(double v);
double decode_real(const nlohmann::json& v);

// Loads .mps or canonical .json by extension.
MipInstance load_instance(const std::filesystem::path& path);
void save_canonical(const MipInstance& instance, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace neuromip

#endif  // NEUROMIP_MPS_IO_HPP_
