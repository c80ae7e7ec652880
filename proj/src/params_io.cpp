#include "captrap/params_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace captrap::io {
namespace {

double need_number(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key))
    throw validation_error(key + ": missing");
  if (!j.at(key).is_number())
    throw validation_error(key + ": must be a number");
  return j.at(key).get<double>();
}

}  // namespace

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw validation_error("parameter document: must be a JSON object");
  const double lambda = need_number(j, "lambda");
  const double alpha = need_number(j, "alpha");
  const double x_star = need_number(j, "x_star");
  const double barrier = need_number(j, "barrier");
  const double c_t = need_number(j, "c_t");
  const bool micro = j.contains("a") || j.contains("b") || j.contains("c_s");
  if (micro && j.contains("r"))
    throw validation_error("r: give either r or the micro inputs a, b, c_s");
  if (micro)
    return make_params_micro(need_number(j, "a"), need_number(j, "b"),
                             need_number(j, "c_s"), lambda, alpha, x_star,
                             barrier, c_t);
  return make_params(need_number(j, "r"), lambda, alpha, x_star, barrier, c_t);
}

ModelParams params_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("config: " + path + ": " + e.what());
  }
  return params_from_json(j);
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0, hi = 0, step = 0;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &extra) != 3)
    throw validation_error("grid: expected lo:hi:step, got '" + spec + "'");
  if (!(step > 0.0) || hi < lo)
    throw validation_error("grid: need step > 0 and hi >= lo");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(
      std::floor((hi - lo) / step + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + step * i);
  return out;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

LossDistribution loss_table_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("loss-table: cannot open " + path);
  std::vector<std::pair<double, double>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double u, z;
    if (!(row >> u >> z)) {
      if (table.empty()) continue;  // header row
      throw validation_error("loss-table: bad row '" + line + "'");
    }
    table.emplace_back(u, z);
  }
  if (table.size() < 2)
    throw validation_error("loss-table: need at least two (u, z) rows");
  std::sort(table.begin(), table.end());
  if (table.front().first > 0.0) table.insert(table.begin(), {0.0, table.front().second});
  if (table.back().first < 1.0) table.emplace_back(1.0, table.back().second);
  for (const auto& [u, z] : table)
    if (!(z > 0.0 && z <= 1.0))
      throw validation_error("loss-table: z values must lie in (0,1]");
  return LossDistribution::custom([table](double u) {
    auto it = std::lower_bound(
        table.begin(), table.end(), u,
        [](const std::pair<double, double>& row, double v) { return row.first < v; });
    if (it == table.begin()) return it->second;
    if (it == table.end()) return table.back().second;
    const auto [u1, z1] = *(it - 1);
    const auto [u2, z2] = *it;
    const double w = (u2 > u1) ? (u - u1) / (u2 - u1) : 0.0;
    const double z = z1 + w * (z2 - z1);
    return std::min(1.0, std::max(z, 1e-300));
  });
}

}  // namespace captrap::io
