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

#include "neuromip/mps_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace neuromip {

namespace {

enum class Section { kNone, kName, kRows, kColumns, kRhs, kRanges, kBounds, kObjSense, kEnd };

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view tok, int line) {
  double v = 0.0;
  std::string_view s = tok;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "malformed number '" + std::string(tok) + "'");
  }
  return v;
}

struct RowInfo {
  char sense;
  int index;  // -1 for the objective, -2 for dropped free rows
};

class MpsParser {
 public:
  MipInstance parse(std::string_view text);

 private:
  void handle_rows(const std::vector<std::string_view>& t, int line);
  void handle_columns(const std::vector<std::string_view>& t, int line);
  void handle_rhs(const std::vector<std::string_view>& t, int line);
  void handle_ranges(const std::vector<std::string_view>& t, int line);
  void handle_bounds(const std::vector<std::string_view>& t, int line);
  const RowInfo& row(std::string_view name, int line) const;
  void materialize_vars();
  void materialize_rows();
  int column(std::string_view name, int line) const;

  MipInstance mip_;
  std::string objective_row_;
  std::unordered_map<std::string, RowInfo> rows_;
  std::vector<char> senses_;
  std::vector<double> rhs_;
  std::unordered_map<std::string, int> cols_;
  std::map<std::pair<int, int>, double> coeffs_;
  std::vector<bool> in_marker_;
  std::vector<bool> bound_set_lower_, bound_set_upper_;
  bool integer_block_ = false;
  bool vars_done_ = false;
  bool rows_done_ = false;
  bool maximize_ = false;
};

const RowInfo& MpsParser::row(std::string_view name, int line) const {
  auto it = rows_.find(std::string(name));
  if (it == rows_.end()) throw ParseError(line, "undeclared row '" + std::string(name) + "'");
  return it->second;
}

int MpsParser::column(std::string_view name, int line) const {
  auto it = cols_.find(std::string(name));
  if (it == cols_.end()) throw ParseError(line, "unknown column '" + std::string(name) + "'");
  return it->second;
}

void MpsParser::materialize_vars() {
  if (vars_done_) return;
  vars_done_ = true;
  mip_.var_lower.assign(mip_.num_vars, 0.0);
  mip_.var_upper.assign(mip_.num_vars, kInf);
  mip_.var_kind.assign(mip_.num_vars, VarKind::kContinuous);
  bound_set_lower_.assign(mip_.num_vars, false);
  bound_set_upper_.assign(mip_.num_vars, false);
  for (int i = 0; i < mip_.num_vars; ++i) {
    if (in_marker_[i]) {
      mip_.var_kind[i] = VarKind::kInteger;
      mip_.var_upper[i] = 1.0;
    }
  }
}

void MpsParser::materialize_rows() {
  if (rows_done_) return;
  rows_done_ = true;
  mip_.row_lower.resize(mip_.num_cons);
  mip_.row_upper.resize(mip_.num_cons);
  for (int j = 0; j < mip_.num_cons; ++j) {
    const double b = rhs_[j];
    switch (senses_[j]) {
      case 'L': mip_.row_lower[j] = -kInf; mip_.row_upper[j] = b; break;
      case 'G': mip_.row_lower[j] = b; mip_.row_upper[j] = kInf; break;
      default: mip_.row_lower[j] = mip_.row_upper[j] = b; break;
    }
  }
}

void MpsParser::handle_rows(const std::vector<std::string_view>& t, int line) {
  if (t.size() != 2 || t[0].size() != 1) throw ParseError(line, "malformed ROWS entry");
  const char sense = static_cast<char>(std::toupper(t[0][0]));
  const std::string name(t[1]);
  if (rows_.contains(name)) throw ParseError(line, "duplicate row '" + name + "'");
  switch (sense) {
    case 'N':
      if (objective_row_.empty()) {
        objective_row_ = name;
        rows_[name] = {'N', -1};
      } else {
        rows_[name] = {'N', -2};
      }
      break;
    case 'L':
    case 'G':
    case 'E': {
      const int idx = mip_.num_cons++;
      rows_[name] = {sense, idx};
      senses_.push_back(sense);
      rhs_.push_back(0.0);
      mip_.con_names.push_back(name);
      break;
    }
    default:
      throw ParseError(line, std::string("unknown row sense '") + sense + "'");
  }
}

void MpsParser::handle_columns(const std::vector<std::string_view>& t, int line) {
  if (t.size() >= 3 && (t[1] == "'MARKER'" || t[1] == "MARKER")) {
    const std::string_view kind = t[2];
    if (kind == "'INTORG'" || kind == "INTORG") {
      if (integer_block_) throw ParseError(line, "nested INTORG marker");
      integer_block_ = true;
    } else if (kind == "'INTEND'" || kind == "INTEND") {
      if (!integer_block_) throw ParseError(line, "INTEND without INTORG");
      integer_block_ = false;
    } else {
      throw ParseError(line, "unknown marker '" + std::string(kind) + "'");
    }
    return;
  }
  if (t.size() != 3 && t.size() != 5) throw ParseError(line, "malformed COLUMNS entry");
  const std::string name(t[0]);
  int col;
  auto it = cols_.find(name);
  if (it == cols_.end()) {
    col = mip_.num_vars++;
    cols_[name] = col;
    mip_.var_names.push_back(name);
    mip_.objective.push_back(0.0);
    in_marker_.push_back(integer_block_);
  } else {
    col = it->second;
  }
  for (std::size_t k = 1; k + 1 < t.size(); k += 2) {
    const RowInfo& r = row(t[k], line);
    const double v = parse_number(t[k + 1], line);
    if (r.index == -1) {
      mip_.objective[col] += v;
    } else if (r.index >= 0) {
      if (!coeffs_.emplace(std::make_pair(r.index, col), v).second) {
        throw ParseError(line, "duplicate coefficient for column '" + name + "'");
      }
    }
  }
}

void MpsParser::handle_rhs(const std::vector<std::string_view>& t, int line) {
  // Optional set name: an odd token count means it is present.
  const std::size_t start = t.size() % 2 == 1 ? 1 : 0;
  if (t.size() - start < 2) throw ParseError(line, "malformed RHS entry");
  for (std::size_t k = start; k + 1 < t.size(); k += 2) {
    const RowInfo& r = row(t[k], line);
    const double v = parse_number(t[k + 1], line);
    if (r.index == -1) mip_.objective_offset = -v;
    else if (r.index >= 0) rhs_[r.index] = v;
  }
}

void MpsParser::handle_ranges(const std::vector<std::string_view>& t, int line) {
  const std::size_t start = t.size() % 2 == 1 ? 1 : 0;
  if (t.size() - start < 2) throw ParseError(line, "malformed RANGES entry");
  for (std::size_t k = start; k + 1 < t.size(); k += 2) {
    const RowInfo& r = row(t[k], line);
    const double v = parse_number(t[k + 1], line);
    if (r.index < 0) throw ParseError(line, "RANGES entry on objective row");
    const double b = rhs_[r.index];
    double& lo = mip_.row_lower[r.index];
    double& hi = mip_.row_upper[r.index];
    switch (r.sense) {
      case 'L': lo = b - std::abs(v); break;
      case 'G': hi = b + std::abs(v); break;
      case 'E':
        if (v >= 0) hi = b + v;
        else lo = b + v;
        break;
      default: break;
    }
  }
}

void MpsParser::handle_bounds(const std::vector<std::string_view>& t, int line) {
  if (t.empty()) throw ParseError(line, "malformed BOUNDS entry");
  std::string type(t[0]);
  for (auto& ch : type) ch = static_cast<char>(std::toupper(ch));
  const bool needs_value = type == "UP" || type == "LO" || type == "FX" ||
                           type == "UI" || type == "LI";
  const bool no_value = type == "FR" || type == "MI" || type == "PL" || type == "BV";
  if (!needs_value && !no_value) throw ParseError(line, "unknown bound type '" + type + "'");
  std::string_view col_name;
  double value = 0.0;
  if (needs_value) {
    if (t.size() == 4) {
      col_name = t[2];
      value = parse_number(t[3], line);
    } else if (t.size() == 3) {
      col_name = t[1];
      value = parse_number(t[2], line);
    } else {
      throw ParseError(line, "malformed " + type + " bound");
    }
  } else {
    if (t.size() == 2) col_name = t[1];
    else if (t.size() == 3 || t.size() == 4) col_name = t[2];
    else throw ParseError(line, "malformed " + type + " bound");
  }
  const int c = column(col_name, line);
  double& lo = mip_.var_lower[c];
  double& hi = mip_.var_upper[c];
  if (type == "UP" || type == "UI") {
    hi = value;
    if (value < 0 && lo == 0.0 && !bound_set_lower_[c]) lo = -kInf;
    bound_set_upper_[c] = true;
    if (type == "UI") mip_.var_kind[c] = VarKind::kInteger;
  } else if (type == "LO" || type == "LI") {
    lo = value;
    bound_set_lower_[c] = true;
    if (type == "LI") mip_.var_kind[c] = VarKind::kInteger;
  } else if (type == "FX") {
    lo = hi = value;
    bound_set_lower_[c] = bound_set_upper_[c] = true;
  } else if (type == "FR") {
    lo = -kInf;
    hi = kInf;
    bound_set_lower_[c] = bound_set_upper_[c] = true;
  } else if (type == "MI") {
    lo = -kInf;
    bound_set_lower_[c] = true;
  } else if (type == "PL") {
    hi = kInf;
    bound_set_upper_[c] = true;
  } else if (type == "BV") {
    lo = 0.0;
    hi = 1.0;
    bound_set_lower_[c] = bound_set_upper_[c] = true;
    mip_.var_kind[c] = VarKind::kBinary;
  }
}

MipInstance MpsParser::parse(std::string_view text) {
  Section section = Section::kNone;
  int line_no = 0;
  bool seen_end = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '*') continue;
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const bool header = line[0] != ' ' && line[0] != '\t';
    if (header) {
      const std::string_view key = tokens[0];
      if (seen_end) throw ParseError(line_no, "data after ENDATA");
      if (key == "NAME") {
        section = Section::kName;
        if (tokens.size() > 1) mip_.name = std::string(tokens[1]);
      } else if (key == "ROWS") {
        section = Section::kRows;
      } else if (key == "COLUMNS") {
        section = Section::kColumns;
      } else if (key == "RHS") {
        section = Section::kRhs;
      } else if (key == "RANGES") {
        section = Section::kRanges;
      } else if (key == "BOUNDS") {
        section = Section::kBounds;
      } else if (key == "OBJSENSE") {
        section = Section::kObjSense;
        if (tokens.size() > 1) maximize_ = tokens[1] == "MAX" || tokens[1] == "MAXIMIZE";
      } else if (key == "ENDATA") {
        section = Section::kEnd;
        seen_end = true;
      } else {
        throw ParseError(line_no, "unknown section '" + std::string(key) + "'");
      }
      if (section == Section::kRhs || section == Section::kRanges ||
          section == Section::kBounds || section == Section::kEnd) {
        if (integer_block_) throw ParseError(line_no, "unbalanced INTORG marker");
        materialize_vars();
      }
      if (section == Section::kRanges || section == Section::kEnd) materialize_rows();
      continue;
    }
    switch (section) {
      case Section::kRows: handle_rows(tokens, line_no); break;
      case Section::kColumns: handle_columns(tokens, line_no); break;
      case Section::kRhs: handle_rhs(tokens, line_no); break;
      case Section::kRanges: handle_ranges(tokens, line_no); break;
      case Section::kBounds: handle_bounds(tokens, line_no); break;
      case Section::kObjSense:
        maximize_ = tokens[0] == "MAX" || tokens[0] == "MAXIMIZE";
        break;
      case Section::kName:
      case Section::kNone:
      case Section::kEnd:
        throw ParseError(line_no, "data line outside of a section");
    }
  }
  if (!seen_end) throw ParseError(line_no, "missing ENDATA");
  if (objective_row_.empty()) throw ParseError(line_no, "no objective (N) row");
  for (const auto& [rc, v] : coeffs_) mip_.entries.push_back({rc.first, rc.second, v});
  for (int i = 0; i < mip_.num_vars; ++i) {
    if (mip_.var_kind[i] == VarKind::kInteger && mip_.var_lower[i] >= 0.0 &&
        mip_.var_upper[i] <= 1.0) {
      mip_.var_kind[i] = VarKind::kBinary;
    }
  }
  if (maximize_) {
    for (double& c : mip_.objective) c = -c;
    mip_.objective_offset = -mip_.objective_offset;
  }
  return mip_;
}

}  // namespace

MipInstance parse_mps(std::string_view text) {
  MpsParser parser;
  return parser.parse(text);
}

MipInstance read_mps_file(const std::filesystem::path& path) {
  return parse_mps(read_text_file(path));
}

nlohmann::json encode_real(double v) {
  if (std::isnan(v)) throw DataError("NaN cannot be serialized");
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double decode_real(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw DataError("bad real encoding '" + s + "'");
  }
  if (!v.is_number()) throw DataError("expected a number");
  return v.get<double>();
}

namespace {

nlohmann::json encode_vector(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(encode_real(x));
  return out;
}

std::vector<double> decode_vector(const nlohmann::json& v, std::size_t expected,
                                  const char* field) {
  if (!v.is_array() || v.size() != expected) {
    throw DataError(std::string("field '") + field + "' has the wrong length");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(decode_real(x));
  return out;
}

void check_format(const nlohmann::json& doc, const char* format) {
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw DataError(std::string("not a ") + format + " document");
  }
  const int version = doc.value("version", -1);
  if (version != kCanonicalVersion) {
    throw DataError("schema version mismatch: expected " +
                    std::to_string(kCanonicalVersion) + ", found " +
                    std::to_string(version));
  }
}

}  // namespace

nlohmann::json to_json(const MipInstance& mip) {
  nlohmann::json doc;
  doc["format"] = "neuromip.mip";
  doc["version"] = kCanonicalVersion;
  doc["name"] = mip.name;
  doc["num_vars"] = mip.num_vars;
  doc["num_cons"] = mip.num_cons;
  doc["objective"] = encode_vector(mip.objective);
  doc["objective_offset"] = encode_real(mip.objective_offset);
  doc["var_lower"] = encode_vector(mip.var_lower);
  doc["var_upper"] = encode_vector(mip.var_upper);
  nlohmann::json kinds = nlohmann::json::array();
  for (VarKind k : mip.var_kind) kinds.push_back(to_string(k));
  doc["var_kind"] = kinds;
  doc["row_lower"] = encode_vector(mip.row_lower);
  doc["row_upper"] = encode_vector(mip.row_upper);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : mip.entries) entries.push_back({e.row, e.col, encode_real(e.value)});
  doc["entries"] = entries;
  doc["var_names"] = mip.var_names;
  doc["con_names"] = mip.con_names;
  return doc;
}

MipInstance mip_from_json(const nlohmann::json& doc) {
  check_format(doc, "neuromip.mip");
  MipInstance mip;
  try {
    mip.name = doc.at("name").get<std::string>();
    mip.num_vars = doc.at("num_vars").get<int>();
    mip.num_cons = doc.at("num_cons").get<int>();
    const auto n = static_cast<std::size_t>(mip.num_vars);
    const auto m = static_cast<std::size_t>(mip.num_cons);
    mip.objective = decode_vector(doc.at("objective"), n, "objective");
    mip.objective_offset = decode_real(doc.at("objective_offset"));
    mip.var_lower = decode_vector(doc.at("var_lower"), n, "var_lower");
    mip.var_upper = decode_vector(doc.at("var_upper"), n, "var_upper");
    const auto& kinds = doc.at("var_kind");
    if (kinds.size() != n) throw DataError("field 'var_kind' has the wrong length");
    for (const auto& k : kinds) mip.var_kind.push_back(var_kind_from_string(k.get<std::string>()));
    mip.row_lower = decode_vector(doc.at("row_lower"), m, "row_lower");
    mip.row_upper = decode_vector(doc.at("row_upper"), m, "row_upper");
    for (const auto& e : doc.at("entries")) {
      mip.entries.push_back({e.at(0).get<int>(), e.at(1).get<int>(), decode_real(e.at(2))});
    }
    mip.var_names = doc.value("var_names", std::vector<std::string>{});
    mip.con_names = doc.value("con_names", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed instance document: ") + ex.what());
  }
  return mip;
}

std::string write_canonical(const MipInstance& instance) {
  return to_json(instance).dump(1) + "\n";
}

MipInstance read_canonical(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw DataError(std::string("invalid JSON: ") + ex.what());
  }
  return mip_from_json(doc);
}

nlohmann::json to_json(const Assignment& a) {
  nlohmann::json doc;
  doc["format"] = "neuromip.assignment";
  doc["version"] = kCanonicalVersion;
  doc["values"] = encode_vector(a.values);
  doc["objective"] = a.objective ? encode_real(*a.objective) : nlohmann::json(nullptr);
  doc["feasible"] = a.feasible == Feasibility::kYes  ? "yes"
                    : a.feasible == Feasibility::kNo ? "no"
                                                     : "unknown";
  return doc;
}

Assignment assignment_from_json(const nlohmann::json& doc) {
  check_format(doc, "neuromip.assignment");
  Assignment a;
  const auto& values = doc.at("values");
  a.values = decode_vector(values, values.size(), "values");
  if (!doc.at("objective").is_null()) a.objective = decode_real(doc.at("objective"));
  const std::string f = doc.value("feasible", "unknown");
  a.feasible = f == "yes" ? Feasibility::kYes : f == "no" ? Feasibility::kNo : Feasibility::kUnknown;
  return a;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

MipInstance load_instance(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".mps" || ext == ".MPS") return read_mps_file(path);
  MipInstance mip = read_canonical(read_text_file(path));
  return mip;
}

void save_canonical(const MipInstance& instance, const std::filesystem::path& path) {
  write_text_file(path, write_canonical(instance));
}

}  // namespace neuromip
