#include <optional>
#include <utility>

#include "skewpbo/benchmarks.hpp"
#include "skewpbo/dataset_io.hpp"
#include "skewpbo/error.hpp"
#include "skewpbo/experiment.hpp"
#include "skewpbo/export.hpp"
#include "skewpbo/hyperparams.hpp"
#include "skewpbo/json_io.hpp"
#include "skewpbo/laplace.hpp"
#include "skewpbo/service.hpp"
#include "skewpbo/skewgp.hpp"
#include "skewpbo/summary.hpp"
#include "skewpbo/sun.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace skewpbo;

namespace {

using DuelList = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

DatasetFile make_dataset(const Eigen::MatrixXd& points, const DuelList& duels,
                         const std::optional<std::vector<bool>>& labels) {
  DatasetFile d;
  d.points = points;
  for (const auto& [w, l] : duels) d.duels.push_back(Duel{w, l});
  d.labels = labels;
  d.validate();
  return d;
}

RbfArdKernel make_kernel(Eigen::Index dim, const Eigen::VectorXd& lengthscale, double variance) {
  if (lengthscale.size() == 1) return RbfArdKernel::isotropic(dim, lengthscale(0), variance);
  return RbfArdKernel(lengthscale, variance);
}

py::dict summary_dict(const PosteriorSummary& s) {
  const auto n = static_cast<Eigen::Index>(s.rows.size());
  Eigen::VectorXd mean(n), lower(n), upper(n), skew(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SummaryRow& r = s.rows[static_cast<std::size_t>(i)];
    mean(i) = r.mean;
    lower(i) = r.lower;
    upper(i) = r.upper;
    skew(i) = r.skewness;
  }
  py::dict out;
  out["mean"] = mean;
  out["lower"] = lower;
  out["upper"] = upper;
  out["skewness"] = skew;
  out["samples"] = s.samples;
  out["seed"] = s.seed;
  out["credible_level"] = s.credible_level;
  return out;
}

/// Surrogate plus the data it was fitted on, so Python keeps one handle.
struct FittedModel {
  std::unique_ptr<Surrogate> model;
  const SkewGpPosterior* skew = nullptr;
};

FittedModel fit(SurrogateKind kind, const Eigen::MatrixXd& points, const DuelList& duels,
                const std::optional<std::vector<bool>>& labels, const Eigen::VectorXd& lengthscale, double variance,
                std::size_t bank_size, std::uint64_t seed) {
  const DatasetFile d = make_dataset(points, duels, labels);
  const RbfArdKernel kernel = make_kernel(points.cols(), lengthscale, variance);
  FittedModel out;
  if (kind == SurrogateKind::SkewGP) {
    gauss::Rng rng(seed);
    PosteriorConfig config;
    config.bank_size = bank_size;
    auto post = std::make_unique<SkewGpPosterior>(fit_posterior(d.points, d.duel_matrix(), kernel, rng, config));
    out.skew = post.get();
    out.model = std::move(post);
  } else {
    out.model = std::make_unique<LaplacePosterior>(fit_laplace(d.points, d.duel_matrix(), kernel));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_skewpbo, m) {
  m.doc() = "Skew Gaussian process preference learning and preferential Bayesian optimization";

  py::register_exception<Error>(m, "SkewPboError");

  py::class_<SunParams>(m, "Sun")
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd, Eigen::MatrixXd, Eigen::VectorXd, Eigen::MatrixXd>(),
           py::arg("xi"), py::arg("omega"), py::arg("delta"), py::arg("gamma"), py::arg("gamma_cov"))
      .def_property_readonly("dim", &SunParams::dim)
      .def_property_readonly("latent_dim", &SunParams::latent_dim)
      .def_property_readonly("xi", &SunParams::location)
      .def_property_readonly("omega", &SunParams::scale)
      .def_property_readonly("delta", &SunParams::skewness)
      .def_property_readonly("gamma", &SunParams::latent_shift)
      .def_property_readonly("gamma_cov", &SunParams::latent_cov)
      .def("log_pdf", [](const SunParams& p, const Eigen::VectorXd& z) { return sun_log_pdf(p, z); })
      .def(
          "sample",
          [](const SunParams& p, std::size_t n, std::uint64_t seed) {
            gauss::Rng rng(seed);
            return sun_sample(p, n, rng);
          },
          py::arg("n"), py::arg("seed") = 0)
      .def("marginalize", [](const SunParams& p, const std::vector<Eigen::Index>& keep) { return sun_marginalize(p, keep); })
      .def("condition",
           [](const SunParams& p, const std::vector<Eigen::Index>& idx, const Eigen::VectorXd& values) {
             return sun_condition(p, idx, values);
           })
      .def("to_json", [](const SunParams& p) { return to_json(p).dump(); })
      .def_static("from_json", [](const std::string& s) { return sun_from_json(Json::parse(s)); });

  m.def("mvn_cdf", &gauss::mvn_cdf, py::arg("upper"), py::arg("cov"));
  m.def("skewness_statistic", &skewness_statistic, py::arg("samples"));
  m.def(
      "lin_ess_sample",
      [](const Eigen::MatrixXd& cov, const Eigen::VectorXd& lower, std::size_t n, std::uint64_t seed) {
        gauss::Rng rng(seed);
        return gauss::lin_ess_sample(cov, lower, n, rng);
      },
      py::arg("cov"), py::arg("lower"), py::arg("n"), py::arg("seed") = 0,
      "Draws from N(0, cov) truncated to x >= lower.");

  py::class_<FittedModel>(m, "Posterior")
      .def_property_readonly("dim", [](const FittedModel& f) { return f.model->dim(); })
      .def("posterior_mean", [](const FittedModel& f, const Eigen::MatrixXd& x) { return f.model->posterior_mean(x); })
      .def(
          "predict_samples",
          [](const FittedModel& f, const Eigen::MatrixXd& x, std::size_t n, std::uint64_t seed) {
            if (!f.skew) throw Error(ErrorKind::InvalidArgument, "predict_samples needs a SkewGP posterior");
            gauss::Rng rng(seed);
            return f.skew->predict_samples(x, n, rng);
          },
          py::arg("x"), py::arg("n"), py::arg("seed") = 0)
      .def(
          "summary",
          [](const FittedModel& f, const Eigen::MatrixXd& x, const Eigen::VectorXd& reference, std::size_t samples,
             std::uint64_t seed, double level) {
            return summary_dict(summarize(*f.model, x, reference, samples, seed, level));
          },
          py::arg("x"), py::arg("reference"), py::arg("samples") = 2000, py::arg("seed") = 0,
          py::arg("credible_level") = 0.95);

  m.def(
      "fit",
      [](const std::string& surrogate, const Eigen::MatrixXd& points, const DuelList& duels,
         const std::optional<std::vector<bool>>& labels, const Eigen::VectorXd& lengthscale, double variance,
         std::size_t bank_size, std::uint64_t seed) {
        return fit(parse_surrogate_kind(surrogate), points, duels, labels, lengthscale, variance, bank_size, seed);
      },
      py::arg("surrogate"), py::arg("points"), py::arg("duels"), py::arg("labels") = std::nullopt,
      py::arg("lengthscale"), py::arg("variance") = 1.0, py::arg("bank_size") = 2000, py::arg("seed") = 0);

  m.def(
      "log_marginal_exact",
      [](const Eigen::MatrixXd& points, const DuelList& duels, const std::optional<std::vector<bool>>& labels,
         const Eigen::VectorXd& lengthscale, double variance) {
        const DatasetFile d = make_dataset(points, duels, labels);
        return log_marginal_exact(d.points, d.duel_matrix(), make_kernel(points.cols(), lengthscale, variance));
      },
      py::arg("points"), py::arg("duels"), py::arg("labels") = std::nullopt, py::arg("lengthscale"),
      py::arg("variance") = 1.0);

  m.def(
      "log_marginal_lower_bound",
      [](const Eigen::MatrixXd& points, const DuelList& duels, const std::optional<std::vector<bool>>& labels,
         const Eigen::VectorXd& lengthscale, double variance, std::size_t block_size, std::uint64_t seed) {
        const DatasetFile d = make_dataset(points, duels, labels);
        return log_marginal_lower_bound(d.points, d.duel_matrix(), make_kernel(points.cols(), lengthscale, variance),
                                        block_size, seed)
            .log_value;
      },
      py::arg("points"), py::arg("duels"), py::arg("labels") = std::nullopt, py::arg("lengthscale"),
      py::arg("variance") = 1.0, py::arg("block_size") = 30, py::arg("seed") = 0);

  m.def(
      "laplace_log_evidence",
      [](const Eigen::MatrixXd& points, const DuelList& duels, const std::optional<std::vector<bool>>& labels,
         const Eigen::VectorXd& lengthscale, double variance) {
        const DatasetFile d = make_dataset(points, duels, labels);
        return laplace_log_evidence(
            fit_laplace(d.points, d.duel_matrix(), make_kernel(points.cols(), lengthscale, variance)));
      },
      py::arg("points"), py::arg("duels"), py::arg("labels") = std::nullopt, py::arg("lengthscale"),
      py::arg("variance") = 1.0);

  m.def("benchmark_names", &benchmark_names);
  m.def(
      "benchmark",
      [](const std::string& name, const Eigen::MatrixXd& x) {
        const Benchmark b = builtin_benchmark(name);
        Eigen::VectorXd out(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = b(x.row(i).transpose());
        return out;
      },
      py::arg("name"), py::arg("x"), "Maximization-form values at the rows of x.");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig config = experiment_from_json(Json::parse(config_json));
        std::vector<TrialRecord> records;
        {
          py::gil_scoped_release release;
          records = run_pbo(config);
        }
        Json out = Json::array();
        for (const TrialRecord& r : records) out.push_back(to_json(r));
        return out.dump();
      },
      py::arg("config_json"), "Runs every trial of one experiment; returns the records as JSON.");

  m.def(
      "export_results",
      [](const std::string& records_json, const std::string& dir, const std::string& format) {
        std::vector<TrialRecord> records;
        for (const Json& j : Json::parse(records_json)) records.push_back(trial_from_json(j));
        std::vector<std::string> paths;
        for (const auto& p : export_results(records, dir, parse_export_format(format))) paths.push_back(p.string());
        return paths;
      },
      py::arg("records_json"), py::arg("dir"), py::arg("format") = "csv");

  py::class_<SessionManager>(m, "SessionStore")
      .def(py::init<std::string>(), py::arg("data_dir"))
      .def("create",
           [](SessionManager& s, const std::string& config_json) {
             return s.create(session_config_from_json(Json::parse(config_json)));
           })
      .def("next", [](SessionManager& s, const std::string& id) { return to_json(s.next_duel(id)).dump(); })
      .def("answer",
           [](SessionManager& s, const std::string& id, const std::string& outcome) {
             const AnswerResult r = s.answer(id, parse_duel_outcome(outcome));
             return Json{{"reference", to_json(r.reference)}, {"answers", r.answers}}.dump();
           })
      .def("summary",
           [](const SessionManager& s, const std::string& id, const Eigen::MatrixXd& x) {
             return to_json(s.summary(id, x)).dump();
           })
      .def("snapshot", [](const SessionManager& s, const std::string& id) { return s.snapshot(id).dump(); })
      .def("list", &SessionManager::list);
}
