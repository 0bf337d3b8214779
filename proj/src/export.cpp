#include "skewpbo/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

namespace fs = std::filesystem;

std::string number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string joined(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += number(v(i));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1], b = v[n / 2];
  return std::isinf(a) || std::isinf(b) ? (a == b ? a : std::numeric_limits<double>::quiet_NaN()) : 0.5 * (a + b);
}

/// Column-oriented table that renders to CSV or to a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  std::string csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out << (i ? "," : "");
        const Json& cell = row[i];
        if (cell.is_null()) continue;
        if (cell.is_string()) out << cell.get<std::string>();
        else if (cell.is_boolean()) out << (cell.get<bool>() ? "true" : "false");
        else if (cell.is_number_float()) out << number(cell.get<double>());
        else out << cell.dump();
      }
      out << '\n';
    }
    return out.str();
  }

  std::string json() const {
    Json arr = Json::array();
    for (const auto& row : rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
  }
}

std::vector<Json> key_cells(const TrialRecord& r) {
  return {r.benchmark, r.mode, r.surrogate, r.acquisition, r.trial};
}

}  // namespace

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "json") return ExportFormat::Json;
  throw Error(ErrorKind::InvalidArgument, "export format must be csv or json");
}

std::vector<SummaryEntry> summarize_trials(const std::vector<TrialRecord>& records) {
  std::vector<SummaryEntry> out;
  std::vector<std::vector<double>> finals;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryEntry& e) {
      return std::tie(e.benchmark, e.mode, e.surrogate, e.acquisition) ==
             std::tie(r.benchmark, r.mode, r.surrogate, r.acquisition);
    });
    if (it == out.end()) {
      SummaryEntry e;
      e.benchmark = r.benchmark;
      e.mode = r.mode;
      e.surrogate = r.surrogate;
      e.acquisition = r.acquisition;
      e.optimum = r.optimum;
      e.curve_max_abs_skewness = std::numeric_limits<double>::quiet_NaN();
      out.push_back(e);
      finals.emplace_back();
      it = out.end() - 1;
    }
    auto& values = finals[static_cast<std::size_t>(it - out.begin())];
    ++it->trials;
    if (r.failed) {
      ++it->failed;
    } else {
      const double v = r.final_feasible_objective();
      values.push_back(std::isnan(v) ? -std::numeric_limits<double>::infinity() : v);
    }
    if (r.curve) {
      const double ss = r.curve->max_abs_skewness();
      if (std::isnan(it->curve_max_abs_skewness) || ss > it->curve_max_abs_skewness) it->curve_max_abs_skewness = ss;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].median_final_objective = median(finals[i]);
    out[i].median_final_regret = out[i].optimum - out[i].median_final_objective;
  }
  return out;
}

std::vector<fs::path> export_results(const std::vector<TrialRecord>& records, const fs::path& dir,
                                     ExportFormat format) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no trial records to export");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  Table results{{"benchmark", "mode", "surrogate", "acquisition", "trial", "duels", "objective", "raw_objective",
                 "feasible", "regret", "reference"},
                {}};
  Table timings{{"benchmark", "mode", "surrogate", "acquisition", "trial", "duels", "wall_ms"}, {}};
  Table curves{{"benchmark", "mode", "surrogate", "acquisition", "trial", "x", "mean", "lower", "upper", "skewness"},
               {}};
  for (const auto& r : records) {
    for (const auto& it : r.iterations) {
      auto row = key_cells(r);
      const double regret = it.feasible ? r.optimum - it.raw_objective : std::numeric_limits<double>::quiet_NaN();
      row.insert(row.end(), {it.duels, json_number(it.objective), json_number(it.raw_objective), it.feasible,
                             json_number(regret), joined(it.reference)});
      results.rows.push_back(std::move(row));
      auto trow = key_cells(r);
      trow.insert(trow.end(), {it.duels, json_number(it.wall_ms)});
      timings.rows.push_back(std::move(trow));
    }
    if (r.curve) {
      for (const auto& c : r.curve->rows) {
        auto row = key_cells(r);
        row.insert(row.end(), {joined(c.x), json_number(c.mean), json_number(c.lower), json_number(c.upper),
                               json_number(c.skewness)});
        curves.rows.push_back(std::move(row));
      }
    }
  }

  Table summary{{"benchmark", "mode", "surrogate", "acquisition", "trials", "failed", "optimum",
                 "median_final_objective", "median_final_regret", "curve_max_abs_skewness"},
                {}};
  for (const auto& e : summarize_trials(records))
    summary.rows.push_back({e.benchmark, e.mode, e.surrogate, e.acquisition, e.trials, e.failed,
                            json_number(e.optimum), json_number(e.median_final_objective),
                            json_number(e.median_final_regret), json_number(e.curve_max_abs_skewness)});

  const std::string ext = format == ExportFormat::Csv ? ".csv" : ".json";
  std::vector<fs::path> written;
  const auto emit = [&](const std::string& name, const Table& t) {
    const fs::path path = dir / (name + ext);
    write_file(path, format == ExportFormat::Csv ? t.csv() : t.json());
    written.push_back(path);
  };
  emit("results", results);
  emit("summary", summary);
  if (!curves.rows.empty()) emit("curves", curves);
  emit("timings", timings);
  return written;
}

void save_records(const std::vector<TrialRecord>& records, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  Json all = Json::array();
  Json times = Json::array();
  for (const auto& r : records) {
    all.push_back(to_json(r));
    Json t = Json::array();
    for (const auto& it : r.iterations) t.push_back(it.wall_ms);
    times.push_back(std::move(t));
  }
  write_file(dir / "records.json", all.dump(1) + "\n");
  write_file(dir / "timings.json", times.dump() + "\n");
}

std::vector<TrialRecord> load_records(const fs::path& dir) {
  const Json all = read_json(dir / "records.json");
  std::vector<TrialRecord> out;
  for (const auto& j : all) out.push_back(trial_from_json(j));
  if (fs::exists(dir / "timings.json")) {
    const Json times = read_json(dir / "timings.json");
    for (std::size_t i = 0; i < out.size() && i < times.size(); ++i)
      for (std::size_t k = 0; k < out[i].iterations.size() && k < times[i].size(); ++k)
        out[i].iterations[k].wall_ms = times[i][k].get<double>();
  }
  return out;
}

}  // namespace skewpbo
