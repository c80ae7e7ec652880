#ifndef CAPTRAP_PARAMS_IO_HPP
#define CAPTRAP_PARAMS_IO_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "captrap/model.hpp"

namespace captrap::io {

// Parameter document: flat key/value JSON with either r or the micro
// triple (a, b, c_s), plus lambda, alpha, x_star, barrier, c_t.
// Validation errors name the offending key.
ModelParams params_from_json(const nlohmann::json& j);
ModelParams params_from_file(const std::string& path);

// "lo:hi:step" inclusive grid (tolerant right endpoint)
std::vector<double> parse_grid(const std::string& spec);

// decimal with 12 significant digits, as used by every CSV column
std::string fmt12(double v);

// two-column CSV (u, z) read as an inverse-CDF table; interpolated
// linearly, z clamped to (0, 1]
LossDistribution loss_table_from_file(const std::string& path);

}  // namespace captrap::io

#endif
