#pragma once

#include <Eigen/Dense>

#include "json.hpp"
#include "skewpbo/sun.hpp"

namespace skewpbo {

using Json = nlohmann::json;

Json to_json(const Eigen::VectorXd& v);
/// Row-major array of arrays.
Json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j);
/// cols fixes the column count for an empty matrix.
Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols = 0);

/// {"xi", "Omega", "Delta", "gamma", "Gamma"}; doubles round-trip exactly.
Json to_json(const SunParams& params);
SunParams sun_from_json(const Json& j);

}  // namespace skewpbo
