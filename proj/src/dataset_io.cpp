#include "skewpbo/dataset_io.hpp"

#include <fstream>

#include "skewpbo/error.hpp"

namespace skewpbo {

void DatasetFile::validate() const {
  if (labels) mixed().validate();
  else preferences().validate();
}

MixedDataset DatasetFile::mixed() const {
  if (!labels) throw Error(ErrorKind::InvalidArgument, "dataset has no labels");
  return MixedDataset{preferences(), *labels};
}

DuelMatrix DatasetFile::duel_matrix() const {
  return labels ? build_mixed_matrix(mixed()) : build_duel_matrix(preferences());
}

Json to_json(const DatasetFile& data) {
  Json duels = Json::array();
  for (const Duel& d : data.duels) duels.push_back(Json::array({d.winner, d.loser}));
  Json j{{"points", to_json(data.points)}, {"duels", duels}};
  if (data.labels) {
    Json labels = Json::array();
    for (bool b : *data.labels) labels.push_back(b);
    j["labels"] = labels;
  }
  return j;
}

DatasetFile dataset_from_json(const Json& j) {
  DatasetFile out;
  try {
    if (!j.is_object() || !j.contains("points") || !j.contains("duels"))
      throw Error(ErrorKind::InvalidArgument, "dataset needs 'points' and 'duels'");
    out.points = matrix_from_json(j.at("points"));
    for (const auto& d : j.at("duels")) {
      if (!d.is_array() || d.size() != 2) throw Error(ErrorKind::InvalidArgument, "each duel is [winner, loser]");
      out.duels.push_back(Duel{d[0].get<Eigen::Index>(), d[1].get<Eigen::Index>()});
    }
    if (j.contains("labels") && !j.at("labels").is_null()) {
      std::vector<bool> labels;
      for (const auto& b : j.at("labels")) labels.push_back(b.get<bool>());
      out.labels = std::move(labels);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("dataset: ") + e.what());
  }
  out.validate();
  return out;
}

DatasetFile load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
  return dataset_from_json(j);
}

void save_dataset(const DatasetFile& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << to_json(data).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

}  // namespace skewpbo
