#include "lpinfer/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lpinfer::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(trim(f));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno == 0;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw std::invalid_argument(what + ": expected a number");
  return j.get<double>();
}

}  // namespace

Index Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<Index>(k);
  }
  throw std::invalid_argument("csv: no column named '" + name + "'");
}

Table parse_csv(const std::string& text) {
  Table t;
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  std::size_t width = 0;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string l = trim(line);
    if (l.empty() || l[0] == '#') continue;
    const auto fields = split_fields(l);
    for (const auto& f : fields) {
      if (f.empty()) throw std::invalid_argument("csv: empty field on line " + std::to_string(lineno));
    }
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_number(fields[k], row[k]);
    if (!numeric) {
      if (rows.empty() && t.header.empty()) {
        t.header = fields;
        width = fields.size();
        continue;
      }
      throw std::invalid_argument("csv: non-numeric field on line " + std::to_string(lineno));
    }
    if (width == 0) width = row.size();
    if (row.size() != width) throw std::invalid_argument("csv: ragged row on line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < width; ++k) t.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  }
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Index>(k)] = number(j[k], what);
  return v;
}

Matrix matrix_from_json(const Json& j, Index cols, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array of rows");
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector r = vector_from_json(j[i], what);
    if (r.size() != cols) throw std::invalid_argument(what + ": row " + std::to_string(i) + " has wrong length");
    m.row(static_cast<Index>(i)) = r.transpose();
  }
  return m;
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Index k = 0; k < v.size(); ++k) j.push_back(v[k] == 0.0 ? 0.0 : v[k]);
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Index i = 0; i < m.rows(); ++i) j.push_back(to_json(Vector(m.row(i).transpose())));
  return j;
}

LinearProgram lp_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("c")) throw std::invalid_argument("lp: expected an object with key \"c\"");
  const Vector c = vector_from_json(j["c"], "lp.c");
  const Index d = c.size();
  const auto block = [&](const char* a, const char* b, Matrix& m, Vector& v) {
    const bool ha = j.contains(a), hb = j.contains(b);
    m = ha ? matrix_from_json(j[a], d, std::string("lp.") + a) : Matrix(0, d);
    v = hb ? vector_from_json(j[b], std::string("lp.") + b) : Vector(0);
    if (m.rows() != v.size()) throw std::invalid_argument(std::string("lp: ") + a + " and " + b + " disagree");
  };
  Matrix ae, ai;
  Vector be, bi;
  block("A_eq", "b_eq", ae, be);
  block("A_ineq", "b_ineq", ai, bi);
  LinearProgram lp(c, ae, be, ai, bi);
  lp.validate();
  return lp;
}

Json lp_to_json(const LinearProgram& lp) {
  Json j;
  j["c"] = to_json(lp.c);
  j["A_eq"] = to_json(lp.a_eq);
  j["b_eq"] = to_json(lp.b_eq);
  j["A_ineq"] = to_json(lp.a_ineq);
  j["b_ineq"] = to_json(lp.b_ineq);
  return j;
}

ComponentMask mask_from_json(const Json& j, Index p) {
  ComponentMask mask(static_cast<std::size_t>(p), Component::Estimated);
  if (j.contains("known")) {
    for (const auto& k : j["known"]) {
      if (!k.is_number_integer()) throw std::invalid_argument("mask.known: expected integers");
      const auto i = k.get<long long>();
      if (i < 0 || i >= p) throw std::invalid_argument("mask.known: index out of range");
      mask[static_cast<std::size_t>(i)] = Component::Known;
    }
    return mask;
  }
  if (j.contains("mask")) {
    const Json& m = j["mask"];
    if (!m.is_array() || static_cast<Index>(m.size()) != p) {
      throw std::invalid_argument("mask.mask: expected " + std::to_string(p) + " entries");
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      const std::string s = m[k].is_string() ? m[k].get<std::string>() : "";
      if (s == "K") {
        mask[k] = Component::Known;
      } else if (s != "U") {
        throw std::invalid_argument("mask.mask: entries must be \"K\" or \"U\"");
      }
    }
    return mask;
  }
  throw std::invalid_argument("mask: expected key \"known\" or \"mask\"");
}

Matrix constraint_matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("A") || !j["A"].is_array() || j["A"].empty()) {
    throw std::invalid_argument("matrix: expected {\"A\": [[...], ...]}");
  }
  return matrix_from_json(j["A"], static_cast<Index>(j["A"][0].size()), "A");
}

SystemSpec system_from_json(const Json& j) {
  SystemSpec s;
  s.a = constraint_matrix_from_json(j);
  if (!j.contains("b")) throw std::invalid_argument("system: missing \"b\"");
  s.b = vector_from_json(j["b"], "system.b");
  const Index p = s.rows(), d = s.cols();
  if (s.b.size() != p) throw std::invalid_argument("system: A and b disagree");
  s.estimated = EntryMask::Constant(p, d + 1, false);
  if (j.contains("estimated")) {
    for (const auto& e : j["estimated"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw std::invalid_argument("system.estimated: expected [row, column] pairs");
      }
      const auto i = e[0].get<long long>(), k = e[1].get<long long>();
      if (i < 0 || i >= p || k < 0 || k > d) throw std::invalid_argument("system.estimated: entry out of range");
      s.estimated(i, k) = true;
    }
  }
  s.b_theta = Vector::Zero(p);
  if (j.contains("b_theta")) {
    s.b_theta = vector_from_json(j["b_theta"], "system.b_theta");
    if (s.b_theta.size() != p) throw std::invalid_argument("system: b_theta has wrong length");
    for (Index i = 0; i < p; ++i) {
      if (s.b_theta[i] != 0.0 && s.estimated(i, d)) {
        throw std::invalid_argument("system: b_theta must vanish on estimated entries of b");
      }
    }
  }
  return s;
}

}  // namespace lpinfer::io
