#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "skewpbo/benchmarks.hpp"
#include "skewpbo/dataset_io.hpp"
#include "skewpbo/error.hpp"
#include "skewpbo/experiment.hpp"
#include "skewpbo/export.hpp"
#include "skewpbo/http_server.hpp"
#include "skewpbo/service.hpp"

#include "CLI11.hpp"

using namespace skewpbo;

namespace {

PboServer* active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

std::string output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SKEWPBO_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, const std::string& format_name,
            std::optional<std::size_t> threads, bool quiet) {
  RunFile file = load_run_file(config_path);
  const ExportFormat format = parse_export_format(format_name);
  const std::string dir = output_dir(out_flag, file.output_dir);
  std::vector<TrialRecord> all;
  for (ExperimentConfig& config : file.experiments) {
    if (threads) config.threads = *threads;
    if (!quiet)
      std::cerr << config.benchmark << " " << config.mode() << " " << to_string(config.surrogate) << " "
                << to_string(config.acquisition.kind) << ": " << config.trials << " trials\n";
    auto records = run_pbo(config, [&](const TrialRecord& r) {
      if (quiet) return;
      std::cerr << "  trial " << r.trial;
      if (r.failed) std::cerr << " failed: " << r.error << "\n";
      else std::cerr << " final " << r.final_feasible_objective() << "\n";
    });
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  save_records(all, dir);
  for (const auto& path : export_results(all, dir, format)) std::cout << path.string() << "\n";
  for (const SummaryEntry& s : summarize_trials(all)) {
    std::cerr << s.benchmark << " " << s.mode << " " << s.surrogate << " " << s.acquisition
              << ": median final objective " << s.median_final_objective << ", median regret "
              << s.median_final_regret << " (" << s.failed << " failed)\n";
  }
  return 0;
}

int cmd_bench_list(bool as_json) {
  Json out = Json::array();
  for (const std::string& name : benchmark_names()) {
    const Benchmark b = builtin_benchmark(name);
    out.push_back({{"name", name},
                   {"dim", b.dim()},
                   {"lower", to_json(b.bounds.lower)},
                   {"upper", to_json(b.bounds.upper)},
                   {"optimum", b.optimum_value()},
                   {"minimize", b.minimize},
                   {"validity", b.has_validity()}});
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  for (const Json& b : out) {
    std::cout << b.at("name").get<std::string>() << "\tdim=" << b.at("dim") << "\toptimum=" << b.at("optimum")
              << (b.at("validity").get<bool>() ? "\tconstrained" : "") << "\n";
  }
  return 0;
}

int cmd_export(const std::string& format_name, const std::string& input, const std::string& out_flag) {
  const ExportFormat format = parse_export_format(format_name);
  const std::string in = input.empty() ? output_dir("", "results") : input;
  const auto records = load_records(in);
  for (const auto& path : export_results(records, output_dir(out_flag, in), format)) std::cout << path.string() << "\n";
  return 0;
}

int cmd_serve(const std::string& bind, int port, const std::string& data_dir) {
  SessionManager manager(data_dir);
  PboServer server(manager);
  active_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving " << manager.list().size() << " sessions from " << data_dir << " on " << bind << ":" << port
            << "\n";
  const bool ok = server.listen(bind, port);
  active_server = nullptr;
  if (!ok) {
    std::cerr << "cannot listen on " << bind << ":" << port << "\n";
    return 1;
  }
  return 0;
}

struct PosteriorArgs {
  std::string dataset;
  std::string surrogate = "skewgp";
  double lengthscale = 0.35;
  double variance = 1.0;
  std::size_t grid = 200;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  std::size_t bank = 20000;
  std::optional<double> reference;
  std::string format = "csv";
};

int cmd_posterior(const PosteriorArgs& a) {
  const DatasetFile data = load_dataset(a.dataset);
  if (data.points.cols() != 1) throw Error(ErrorKind::InvalidArgument, "posterior curves need a 1D dataset");
  const SurrogateKind kind = parse_surrogate_kind(a.surrogate);
  const DuelMatrix w = data.duel_matrix();
  gauss::Rng rng(derive_seed(a.seed, 2));
  const auto model =
      fit_surrogate(kind, data.points, w, RbfArdKernel::isotropic(1, a.lengthscale, a.variance), rng, a.bank);

  Eigen::VectorXd reference(1);
  if (a.reference) {
    reference(0) = *a.reference;
  } else {
    const Eigen::VectorXd mean = model->posterior_mean(data.points);
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      if (data.labels && !(*data.labels)[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || mean(i) > mean(best)) best = i;
    }
    reference(0) = data.points(best, 0);
  }
  double lo = a.lower, hi = a.upper;
  if (!(hi > lo)) {
    lo = data.points.minCoeff();
    hi = data.points.maxCoeff();
  }
  const Eigen::MatrixXd grid = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(a.grid), lo, hi);
  const PosteriorSummary s = summarize(*model, grid, reference, a.samples, derive_seed(a.seed, 4));
  if (parse_export_format(a.format) == ExportFormat::Json) {
    Json rows = Json::array();
    for (const SummaryRow& r : s.rows)
      rows.push_back({{"x", r.x(0)}, {"mean", r.mean}, {"lower", r.lower}, {"upper", r.upper}, {"skewness", r.skewness}});
    std::cout << Json{{"reference", reference(0)}, {"samples", s.samples}, {"seed", s.seed}, {"rows", rows}}.dump(2)
              << "\n";
  } else {
    std::cout << "x,mean,lower,upper,skewness\n";
    for (const SummaryRow& r : s.rows)
      std::cout << r.x(0) << "," << r.mean << "," << r.lower << "," << r.upper << "," << r.skewness << "\n";
  }
  std::cerr << "reference " << reference(0) << ", max |skewness| " << s.max_abs_skewness() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preferential Bayesian optimization with skew Gaussian process surrogates"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "csv";
  std::optional<std::size_t> threads;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiments of a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", out_dir, "Output directory (default: SKEWPBO_OUTPUT_DIR or the config value)");
  run->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_flag("--quiet", quiet, "No per-trial progress");

  auto* bench = app.add_subcommand("bench", "Benchmark catalogue");
  bench->require_subcommand(1);
  bool bench_json = false;
  auto* bench_list = bench->add_subcommand("list", "List built-in benchmarks");
  bench_list->add_flag("--json", bench_json, "JSON output");

  std::string export_format, export_in, export_out;
  auto* exp = app.add_subcommand("export", "Re-export saved records");
  exp->add_option("--format", export_format, "Table format")->required()->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("--input", export_in, "Directory holding records.json (default: SKEWPBO_OUTPUT_DIR or results)");
  exp->add_option("--output-dir", export_out, "Output directory (default: the input directory)");

  std::string bind = "127.0.0.1", data_dir = "sessions";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the session API over HTTP");
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--data-dir", data_dir, "Session log directory");

  PosteriorArgs pa;
  auto* post = app.add_subcommand("posterior", "Posterior summary curves of f(x) - f(reference) for a 1D dataset");
  post->add_option("--dataset", pa.dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
  post->add_option("--surrogate", pa.surrogate, "skewgp or gpl");
  post->add_option("--lengthscale", pa.lengthscale, "Kernel lengthscale");
  post->add_option("--variance", pa.variance, "Kernel variance");
  post->add_option("--grid", pa.grid, "Grid points");
  post->add_option("--lower", pa.lower, "Grid start (default: smallest point)");
  post->add_option("--upper", pa.upper, "Grid end (default: largest point)");
  post->add_option("--samples", pa.samples, "Monte Carlo draws per point");
  post->add_option("--bank", pa.bank, "Stored posterior draws (SkewGP)");
  post->add_option("--seed", pa.seed, "Seed");
  post->add_option("--reference", pa.reference, "Reference point (default: best posterior mean among the data)");
  post->add_option("--format", pa.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, format, threads, quiet);
    if (*bench_list) return cmd_bench_list(bench_json);
    if (*exp) return cmd_export(export_format, export_in, export_out);
    if (*serve) return cmd_serve(bind, port, data_dir);
    if (*post) return cmd_posterior(pa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
