#pragma once

#include "lpinfer/lp.hpp"
#include "lpinfer/moments.hpp"
#include "lpinfer/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lpinfer::io {

using Json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> header;  ///< empty when the file has none
  Matrix values;

  /// Column position by header name; throws std::invalid_argument if absent.
  Index column(const std::string& name) const;
};

/// Comma-separated numbers; '#' lines and blank lines are skipped, a first row
/// with any non-numeric field is the header.
Table parse_csv(const std::string& text);
Table read_csv(const std::string& path);

std::string read_file(const std::string& path);
Json read_json(const std::string& path);
/// Writes to path, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

Vector vector_from_json(const Json& j, const std::string& what);
/// Array of rows; [] gives 0 x cols.
Matrix matrix_from_json(const Json& j, Index cols, const std::string& what);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);

/// {"c": [...], "A_eq": [[...]], "b_eq": [...], "A_ineq": [[...]], "b_ineq": [...]};
/// either block may be omitted. Other keys are ignored.
LinearProgram lp_from_json(const Json& j);
Json lp_to_json(const LinearProgram& lp);

/// {"known": [indices]} or {"mask": ["K" | "U", ...]} for p components.
ComponentMask mask_from_json(const Json& j, Index p);

/// {"A": [[...]]}.
Matrix constraint_matrix_from_json(const Json& j);

/// {"A": [[...]], "b": [...], "estimated": [[i, j], ...], "b_theta": [...]}.
/// Entry (i, d) is b_i. Estimated entries are means of the data columns, in
/// ascending vec([A b]) order; b_theta (optional) moves the hypothesis b + theta b_theta.
struct SystemSpec {
  Matrix a;
  Vector b;
  EntryMask estimated;
  Vector b_theta;

  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }
};

SystemSpec system_from_json(const Json& j);

}  // namespace lpinfer::io
