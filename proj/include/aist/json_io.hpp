#pragma once

// Small helpers shared by the file formats.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace aist::io {

using json = nlohmann::json;

/// Array of rows.
json matrix_to_json(const Eigen::MatrixXd& m);
/// Accepts an array of equal-length rows; throws ShapeError otherwise.
Eigen::MatrixXd matrix_from_json(const json& j, std::string_view what);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

json read_json_file(const std::string& path);
/// Writes `j.dump(2)` plus a trailing newline.
void write_json_file(const std::string& path, const json& j);

}  // namespace aist::io
