#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>

#include "serw/mmspace.hpp"

namespace serw {

/// Strict CSV matrix reader: UTF-8, comma-separated decimals, no header,
/// one point per row, all rows of equal width. Errors carry the
/// offending row and column.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

/// One decimal per line.
Eigen::VectorXd load_vector_csv(const std::string& path);

/// Writes a matrix as comma-separated rows at full double precision.
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

/// Builds a space from a point CSV and an optional weights file. Weights
/// are renormalized to sum to one, with a warning when the raw sum is
/// off by more than 1e-6.
MmSpace load_space(const std::string& path, const std::string& weights_path = "");

/// Serializes with numbers at 17 significant digits ("%.17g"), object
/// keys in insertion order, two-space indentation and a trailing
/// newline. Byte-identical output for identical values.
std::string dump_json(const nlohmann::ordered_json& value);

/// dump_json to a file.
void emit_report(const nlohmann::ordered_json& report, const std::string& path);

}  // namespace serw
