#include "skewpbo/json_io.hpp"

#include "skewpbo/error.hpp"

namespace skewpbo {

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidArgument, "expected a JSON array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::InvalidArgument, "expected a number");
    out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidArgument, "expected a JSON array of rows");
  if (j.empty()) return Eigen::MatrixXd(0, cols);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto width = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd out(rows, width);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd row = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (row.size() != width) throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
    out.row(i) = row.transpose();
  }
  return out;
}

Json to_json(const SunParams& params) {
  return Json{{"xi", to_json(params.location())},
              {"Omega", to_json(params.scale())},
              {"Delta", to_json(params.skewness())},
              {"gamma", to_json(params.latent_shift())},
              {"Gamma", to_json(params.latent_cov())}};
}

SunParams sun_from_json(const Json& j) {
  for (const char* key : {"xi", "Omega", "Delta", "gamma", "Gamma"})
    if (!j.contains(key)) throw Error(ErrorKind::InvalidArgument, std::string("SunParams JSON lacks ") + key);
  Eigen::VectorXd xi = vector_from_json(j.at("xi"));
  Eigen::VectorXd gamma = vector_from_json(j.at("gamma"));
  const Eigen::Index s = gamma.size();
  Eigen::MatrixXd delta = matrix_from_json(j.at("Delta"), s);
  return SunParams(std::move(xi), matrix_from_json(j.at("Omega")), std::move(delta), std::move(gamma),
                   matrix_from_json(j.at("Gamma"), s));
}

}  // namespace skewpbo
