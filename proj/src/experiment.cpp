#include "skewpbo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "skewpbo/error.hpp"
#include "skewpbo/hyperparams.hpp"
#include "skewpbo/laplace.hpp"
#include "skewpbo/skewgp.hpp"

namespace skewpbo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Stream : std::uint64_t { kInit = 1, kFit = 2, kTune = 3, kCurve = 4, kRound = 1000 };

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
      throw Error(ErrorKind::InvalidConfig, std::string(what) + ": unknown field '" + it.key() + "'");
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

/// Observations gathered during one trial plus the design matrix they induce.
struct TrialData {
  DatasetBuilder builder;
  bool mixed;

  Eigen::MatrixXd points;
  DuelMatrix duels;
  std::vector<bool> valid;

  void refresh() {
    if (mixed) {
      MixedDataset m = builder.mixed();
      points = m.preferences.points;
      duels = build_mixed_matrix(m);
      valid = m.valid;
    } else {
      PreferenceDataset p = builder.preferences();
      points = p.points;
      duels = build_duel_matrix(p);
      valid.assign(static_cast<std::size_t>(points.rows()), true);
    }
  }
};

}  // namespace

Json to_json(const AcquisitionSpec& a) {
  return Json{{"kind", std::string(to_string(a.kind))},
              {"credible_level", a.credible_level},
              {"k", a.tradeoff},
              {"mc_samples", a.mc_samples},
              {"candidates", a.candidates},
              {"refine_evaluations", a.refine_evaluations},
              {"seed", a.seed}};
}

AcquisitionSpec acquisition_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "acquisition must be an object");
  reject_unknown(j, {"kind", "credible_level", "k", "mc_samples", "candidates", "refine_evaluations", "seed"},
                 "acquisition");
  AcquisitionSpec a;
  if (j.contains("kind")) a.kind = parse_acquisition_kind(j.at("kind").get<std::string>());
  read(j, "credible_level", a.credible_level);
  read(j, "k", a.tradeoff);
  read(j, "mc_samples", a.mc_samples);
  read(j, "candidates", a.candidates);
  read(j, "refine_evaluations", a.refine_evaluations);
  read(j, "seed", a.seed);
  return a;
}

std::string_view to_string(SurrogateKind kind) noexcept { return kind == SurrogateKind::SkewGP ? "SkewGP" : "GPL"; }

SurrogateKind parse_surrogate_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "skewgp") return SurrogateKind::SkewGP;
  if (s == "gpl" || s == "laplace") return SurrogateKind::GPL;
  throw Error(ErrorKind::InvalidConfig, "unknown surrogate '" + std::string(name) + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void ExperimentConfig::validate() const {
  const Benchmark bench = builtin_benchmark(benchmark);
  acquisition.validate();
  if (initial_duels == 0) throw Error(ErrorKind::InvalidConfig, "initial_duels must be positive");
  if (budget < initial_duels) throw Error(ErrorKind::InvalidConfig, "budget must be at least initial_duels");
  if (trials == 0) throw Error(ErrorKind::InvalidConfig, "trials must be positive");
  if (mixed && penalty) throw Error(ErrorKind::InvalidConfig, "mixed and penalty modes are exclusive");
  if ((mixed || penalty) && !bench.has_validity())
    throw Error(ErrorKind::InvalidConfig, benchmark + " has no validity function");
  if (!(penalty_weight > 0.0)) throw Error(ErrorKind::InvalidConfig, "penalty_weight must be positive");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw Error(ErrorKind::InvalidConfig, "variance must be positive");
  if (lengthscale && (!(*lengthscale > 0.0) || !std::isfinite(*lengthscale)))
    throw Error(ErrorKind::InvalidConfig, "lengthscale must be positive");
  if (reoptimize_every == 0) throw Error(ErrorKind::InvalidConfig, "reoptimize_every must be positive");
  if (optimize_hyperparameters && annealing_budget == 0)
    throw Error(ErrorKind::InvalidConfig, "annealing_budget must be positive");
  if (bank_size == 0) throw Error(ErrorKind::InvalidConfig, "bank_size must be positive");
}

std::string ExperimentConfig::mode() const { return mixed ? "mixed" : penalty ? "penalty" : "plain"; }

Benchmark ExperimentConfig::oracle() const {
  Benchmark bench = builtin_benchmark(benchmark);
  return penalty ? penalized_objective(bench, penalty_weight) : bench;
}

RbfArdKernel ExperimentConfig::initial_kernel(const Box& bounds) const {
  const Eigen::VectorXd ls =
      lengthscale ? Eigen::VectorXd::Constant(bounds.dim(), *lengthscale) : Eigen::VectorXd(0.1 * bounds.width());
  return RbfArdKernel(ls, variance);
}

Json to_json(const ExperimentConfig& c) {
  Json j{{"benchmark", c.benchmark},
         {"surrogate", std::string(to_string(c.surrogate))},
         {"acquisition", to_json(c.acquisition)},
         {"initial_duels", c.initial_duels},
         {"budget", c.budget},
         {"trials", c.trials},
         {"seed", c.seed},
         {"mixed", c.mixed},
         {"penalty", c.penalty},
         {"penalty_weight", c.penalty_weight},
         {"optimize_hyperparameters", c.optimize_hyperparameters},
         {"variance", c.variance},
         {"reoptimize_every", c.reoptimize_every},
         {"annealing_budget", c.annealing_budget},
         {"bank_size", c.bank_size},
         {"curves", c.curves},
         {"curve_points", c.curve_points},
         {"threads", c.threads}};
  j["lengthscale"] = c.lengthscale ? Json(*c.lengthscale) : Json(nullptr);
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "experiment must be an object");
  reject_unknown(j,
                 {"benchmark", "surrogate", "acquisition", "initial_duels", "budget", "trials", "seed", "mixed",
                  "penalty", "penalty_weight", "optimize_hyperparameters", "lengthscale", "variance",
                  "reoptimize_every", "annealing_budget", "bank_size", "curves", "curve_points", "threads"},
                 "experiment");
  ExperimentConfig c;
  try {
    read(j, "benchmark", c.benchmark);
    if (j.contains("surrogate")) c.surrogate = parse_surrogate_kind(j.at("surrogate").get<std::string>());
    if (j.contains("acquisition")) c.acquisition = acquisition_from_json(j.at("acquisition"));
    read(j, "initial_duels", c.initial_duels);
    read(j, "budget", c.budget);
    read(j, "trials", c.trials);
    read(j, "seed", c.seed);
    read(j, "mixed", c.mixed);
    read(j, "penalty", c.penalty);
    read(j, "penalty_weight", c.penalty_weight);
    read(j, "optimize_hyperparameters", c.optimize_hyperparameters);
    if (j.contains("lengthscale") && !j.at("lengthscale").is_null()) c.lengthscale = j.at("lengthscale").get<double>();
    read(j, "variance", c.variance);
    read(j, "reoptimize_every", c.reoptimize_every);
    read(j, "annealing_budget", c.annealing_budget);
    read(j, "bank_size", c.bank_size);
    read(j, "curves", c.curves);
    read(j, "curve_points", c.curve_points);
    read(j, "threads", c.threads);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  return c;
}

RunFile run_file_from_json(const Json& j) {
  RunFile out;
  if (j.is_object() && j.contains("experiments")) {
    reject_unknown(j, {"experiments", "output_dir"}, "run file");
    if (!j.at("experiments").is_array()) throw Error(ErrorKind::InvalidConfig, "experiments must be an array");
    for (const auto& e : j.at("experiments")) out.experiments.push_back(experiment_from_json(e));
    if (j.contains("output_dir")) out.output_dir = j.at("output_dir").get<std::string>();
  } else {
    Json single = j;
    if (single.is_object() && single.contains("output_dir")) {
      out.output_dir = single.at("output_dir").get<std::string>();
      single.erase("output_dir");
    }
    out.experiments.push_back(experiment_from_json(single));
  }
  if (out.experiments.empty()) throw Error(ErrorKind::InvalidConfig, "run file lists no experiments");
  for (const auto& e : out.experiments) e.validate();
  return out;
}

RunFile load_run_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
  return run_file_from_json(j);
}

double TrialRecord::final_feasible_objective() const {
  if (iterations.empty() || !iterations.back().feasible) return kNaN;
  return iterations.back().raw_objective;
}

double TrialRecord::final_regret() const { return optimum - final_feasible_objective(); }

Json to_json(const TrialRecord& r) {
  Json its = Json::array();
  for (const auto& it : r.iterations) {
    Json e{{"duels", it.duels},
           {"reference", to_json(it.reference)},
           {"objective", it.objective},
           {"raw_objective", it.raw_objective},
           {"feasible", it.feasible}};
    e["proposal"] = it.proposal.size() > 0 ? to_json(it.proposal) : Json(nullptr);
    e["outcome"] = it.outcome ? Json(std::string(to_string(*it.outcome))) : Json(nullptr);
    its.push_back(std::move(e));
  }
  Json j{{"benchmark", r.benchmark},   {"mode", r.mode},         {"surrogate", r.surrogate},
         {"acquisition", r.acquisition}, {"trial", r.trial},     {"seed", r.seed},
         {"optimum", r.optimum},       {"iterations", its},      {"lengthscales", to_json(r.lengthscales)},
         {"variance", r.variance},     {"failed", r.failed},     {"error", r.error}};
  if (r.curve) {
    Json rows = Json::array();
    for (const auto& row : r.curve->rows)
      rows.push_back(Json{{"x", to_json(row.x)},
                          {"mean", row.mean},
                          {"lower", row.lower},
                          {"upper", row.upper},
                          {"skewness", row.skewness}});
    j["curve"] = Json{{"samples", r.curve->samples},
                      {"seed", r.curve->seed},
                      {"credible_level", r.curve->credible_level},
                      {"rows", rows}};
  }
  return j;
}

TrialRecord trial_from_json(const Json& j) {
  TrialRecord r;
  try {
    r.benchmark = j.at("benchmark").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.surrogate = j.at("surrogate").get<std::string>();
    r.acquisition = j.at("acquisition").get<std::string>();
    r.trial = j.at("trial").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.optimum = j.at("optimum").get<double>();
    r.lengthscales = vector_from_json(j.at("lengthscales"));
    r.variance = j.at("variance").get<double>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    for (const auto& e : j.at("iterations")) {
      IterationRecord it;
      it.duels = e.at("duels").get<std::size_t>();
      it.reference = vector_from_json(e.at("reference"));
      it.objective = e.at("objective").get<double>();
      it.raw_objective = e.at("raw_objective").get<double>();
      it.feasible = e.at("feasible").get<bool>();
      if (!e.at("proposal").is_null()) it.proposal = vector_from_json(e.at("proposal"));
      if (!e.at("outcome").is_null()) it.outcome = parse_duel_outcome(e.at("outcome").get<std::string>());
      r.iterations.push_back(std::move(it));
    }
    if (j.contains("curve")) {
      const Json& c = j.at("curve");
      PosteriorSummary s;
      s.samples = c.at("samples").get<std::size_t>();
      s.seed = c.at("seed").get<std::uint64_t>();
      s.credible_level = c.at("credible_level").get<double>();
      for (const auto& row : c.at("rows"))
        s.rows.push_back(SummaryRow{vector_from_json(row.at("x")), row.at("mean").get<double>(),
                                    row.at("lower").get<double>(), row.at("upper").get<double>(),
                                    row.at("skewness").get<double>()});
      r.curve = std::move(s);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("trial record: ") + e.what());
  }
  return r;
}

std::unique_ptr<Surrogate> fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                         const RbfArdKernel& kernel, gauss::Rng& rng, std::size_t bank_size) {
  if (kind == SurrogateKind::SkewGP) {
    PosteriorConfig config;
    config.bank_size = bank_size;
    return std::make_unique<SkewGpPosterior>(fit_posterior(points, duels, kernel, rng, config));
  }
  return std::make_unique<LaplacePosterior>(fit_laplace(points, duels, kernel));
}

RbfArdKernel tune_kernel(SurrogateKind kind, const Eigen::MatrixXd& points, const DuelMatrix& duels,
                         const RbfArdKernel& start, const Box& bounds, std::size_t budget, gauss::Rng& rng) {
  AnnealingConfig config;
  config.input_range = bounds.width();
  if (kind == SurrogateKind::SkewGP) return optimize_hyperparams(points, duels, start, budget, rng, config).kernel;
  const KernelObjective evidence = [&](const RbfArdKernel& k) {
    const LaplacePosterior post = fit_laplace(points, duels, k);
    return post.converged() ? laplace_log_evidence(post) : -std::numeric_limits<double>::infinity();
  };
  return anneal_kernel(start, evidence, bounds.width(), budget, rng, config).kernel;
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t trial) {
  const Benchmark bench = config.oracle();
  const Box& box = bench.bounds;
  const Eigen::Index dim = bench.dim();
  const OracleMode oracle_mode = config.mixed ? OracleMode::Mixed : OracleMode::Preference;

  TrialRecord record;
  record.benchmark = config.benchmark;
  record.mode = config.mode();
  record.surrogate = std::string(to_string(config.surrogate));
  record.acquisition = std::string(to_string(config.acquisition.kind));
  record.trial = trial;
  record.seed = derive_seed(config.seed, trial);
  record.optimum = bench.optimum_value();

  RbfArdKernel kernel = config.initial_kernel(box);
  record.lengthscales = kernel.lengthscales();
  record.variance = kernel.variance();

  gauss::Rng fit_rng(derive_seed(record.seed, kFit));
  gauss::Rng tune_rng(derive_seed(record.seed, kTune));
  TrialData data{DatasetBuilder(dim), config.mixed, {}, {}, {}};
  Eigen::VectorXd reference;

  const auto make_record = [&](Eigen::VectorXd proposal, std::optional<DuelOutcome> outcome, double ms) {
    IterationRecord it;
    it.duels = config.initial_duels + (record.iterations.empty() ? 0 : record.iterations.size());
    it.proposal = std::move(proposal);
    it.outcome = outcome;
    it.reference = reference;
    it.objective = bench(reference);
    it.raw_objective = bench.objective(reference);
    it.feasible = bench.valid(reference);
    it.wall_ms = ms;
    record.iterations.push_back(std::move(it));
  };

  try {
    auto start = std::chrono::steady_clock::now();

    // Initial duels: disjoint pairs of uniform points; the second point of a
    // pair plays the incumbent for the tie rule.
    gauss::Rng init_rng(derive_seed(record.seed, kInit));
    const Eigen::MatrixXd init = box.uniform(static_cast<Eigen::Index>(2 * config.initial_duels), init_rng);
    for (std::size_t i = 0; i < config.initial_duels; ++i) {
      const Eigen::VectorXd a = init.row(static_cast<Eigen::Index>(2 * i)).transpose();
      const Eigen::VectorXd b = init.row(static_cast<Eigen::Index>(2 * i + 1)).transpose();
      if (config.mixed) {
        const bool va = bench.valid(a), vb = bench.valid(b);
        data.builder.add_label(a, va);
        data.builder.add_label(b, vb);
        if (!va || !vb) continue;
      }
      if (answer_duel(bench, a, b) == DuelOutcome::CandidateWins) data.builder.add_duel(a, b);
      else data.builder.add_duel(b, a);
    }
    data.refresh();

    const auto maybe_tune = [&](std::size_t duels_so_far) {
      if (!config.optimize_hyperparameters) return;
      if ((duels_so_far - config.initial_duels) % config.reoptimize_every != 0) return;
      kernel = tune_kernel(config.surrogate, data.points, data.duels, kernel, box, config.annealing_budget, tune_rng);
    };

    maybe_tune(config.initial_duels);
    std::unique_ptr<Surrogate> model =
        fit_surrogate(config.surrogate, data.points, data.duels, kernel, fit_rng, config.bank_size);

    // Reference: highest posterior mean among the valid observed points.
    {
      const Eigen::VectorXd mean = model->posterior_mean(data.points);
      Eigen::Index best = -1;
      for (Eigen::Index i = 0; i < mean.size(); ++i) {
        if (!data.valid[static_cast<std::size_t>(i)]) continue;
        if (best < 0 || mean(i) > mean(best)) best = i;
      }
      if (best < 0) mean.maxCoeff(&best);
      reference = data.points.row(best).transpose();
    }
    make_record(Eigen::VectorXd(), std::nullopt, elapsed_ms(start));

    for (std::size_t duels = config.initial_duels; duels < config.budget; ++duels) {
      start = std::chrono::steady_clock::now();
      if (duels > config.initial_duels) {
        maybe_tune(duels);
        model = fit_surrogate(config.surrogate, data.points, data.duels, kernel, fit_rng, config.bank_size);
      }
      const std::uint64_t round_seed = derive_seed(record.seed ^ config.acquisition.seed, kRound + duels);
      const DuelProposal proposal = optimize_acquisition(*model, config.acquisition, reference, box, round_seed);
      const Eigen::VectorXd& x = proposal.candidate;

      DuelOutcome outcome = answer_duel(bench, x, reference, oracle_mode);
      if (outcome == DuelOutcome::CandidateNonValid) {
        data.builder.add_label(x, false);
      } else if (config.mixed && !bench.valid(reference)) {
        // No valid incumbent yet: the first valid candidate takes its place.
        data.builder.add_label(x, true);
        outcome = DuelOutcome::CandidateWins;
      } else {
        if (config.mixed) data.builder.add_label(x, true);
        if (x != reference) {
          if (outcome == DuelOutcome::CandidateWins) data.builder.add_duel(x, reference);
          else data.builder.add_duel(reference, x);
        }
      }
      reference = update_reference(reference, x, outcome);
      data.refresh();
      make_record(x, outcome, elapsed_ms(start));
    }

    if (config.curves && dim == 1 && trial == 0) {
      model = fit_surrogate(config.surrogate, data.points, data.duels, kernel, fit_rng, config.bank_size);
      const Eigen::MatrixXd grid =
          Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(config.curve_points), box.lower(0), box.upper(0));
      record.curve = summarize(*model, grid, reference, std::max<std::size_t>(config.acquisition.mc_samples, 100),
                               derive_seed(record.seed, kCurve));
    }
  } catch (const Error& e) {
    record.failed = true;
    record.error = e.what();
  }
  record.lengthscales = kernel.lengthscales();
  record.variance = kernel.variance();
  return record;
}

std::vector<TrialRecord> run_pbo(const ExperimentConfig& config, const TrialCallback& on_trial) {
  config.validate();
  std::vector<TrialRecord> out(config.trials);
  std::size_t workers = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.trials);
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  const auto work = [&] {
    for (std::size_t t = next++; t < config.trials; t = next++) {
      out[t] = run_trial(config, t);
      if (on_trial) {
        const std::lock_guard lock(callback_mutex);
        on_trial(out[t]);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  return out;
}

}  // namespace skewpbo
