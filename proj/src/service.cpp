#include "skewpbo/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "skewpbo/error.hpp"
#include "skewpbo/laplace.hpp"
#include "skewpbo/skewgp.hpp"

namespace skewpbo {

namespace {

enum Stream : std::uint64_t { kInit = 1, kFit = 2, kTune = 3, kSummary = 4, kRound = 1000 };

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::VectorXd valid_probability(const Surrogate& model, const Eigen::MatrixXd& query, std::uint64_t seed,
                                  std::size_t samples) {
  Eigen::VectorXd out(query.rows());
  if (const auto* laplace = dynamic_cast<const LaplacePosterior*>(&model)) {
    const GaussianPrediction g = laplace_predict(*laplace, query);
    for (Eigen::Index i = 0; i < query.rows(); ++i)
      out(i) = gauss::std_normal_cdf(g.mean(i) / std::sqrt(std::max(g.cov(i, i), 1e-300)));
    return out;
  }
  const auto& skew = dynamic_cast<const SkewGpPosterior&>(model);
  gauss::Rng rng(seed);
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    const Eigen::VectorXd draws = skew.predict_samples(query.row(i), samples, rng).col(0);
    out(i) = static_cast<double>((draws.array() > 0.0).count()) / static_cast<double>(draws.size());
  }
  return out;
}

const Json& field(const Json& event, const char* key) {
  if (!event.contains(key)) throw Error(ErrorKind::InvalidArgument, std::string("event lacks '") + key + "'");
  return event.at(key);
}

Json kernel_json(const RbfArdKernel& k) {
  return Json{{"lengthscales", to_json(k.lengthscales())}, {"variance", k.variance()}};
}

}  // namespace

void SessionConfig::validate() const {
  bounds.validate();
  acquisition.validate();
  if (lengthscale && !(*lengthscale > 0.0 && std::isfinite(*lengthscale)))
    throw Error(ErrorKind::InvalidConfig, "lengthscale must be positive");
  if (!(variance > 0.0 && std::isfinite(variance))) throw Error(ErrorKind::InvalidConfig, "variance must be positive");
  if (reoptimize_every == 0) throw Error(ErrorKind::InvalidConfig, "reoptimize_every must be positive");
  if (bank_size == 0) throw Error(ErrorKind::InvalidConfig, "bank_size must be positive");
  if (summary_samples < 100) throw Error(ErrorKind::InvalidConfig, "summary_samples must be at least 100");
  if (!dimension_labels.empty() && static_cast<Eigen::Index>(dimension_labels.size()) != bounds.dim())
    throw Error(ErrorKind::InvalidConfig, "dimension_labels needs one entry per dimension");
}

Json to_json(const SessionConfig& c) {
  Json j{{"bounds", {{"lower", to_json(c.bounds.lower)}, {"upper", to_json(c.bounds.upper)}}},
         {"surrogate", std::string(to_string(c.surrogate))},
         {"acquisition", to_json(c.acquisition)},
         {"mixed", c.mixed},
         {"seed", c.seed},
         {"optimize_hyperparameters", c.optimize_hyperparameters},
         {"variance", c.variance},
         {"reoptimize_every", c.reoptimize_every},
         {"annealing_budget", c.annealing_budget},
         {"bank_size", c.bank_size},
         {"summary_samples", c.summary_samples},
         {"dimension_labels", c.dimension_labels}};
  j["lengthscale"] = c.lengthscale ? Json(*c.lengthscale) : Json(nullptr);
  return j;
}

SessionConfig session_config_from_json(const Json& j) {
  static const std::vector<std::string> known{"bounds",        "surrogate",       "acquisition",      "mixed",
                                              "seed",          "optimize_hyperparameters", "lengthscale", "variance",
                                              "reoptimize_every", "annealing_budget", "bank_size", "summary_samples",
                                              "dimension_labels"};
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "session config must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw Error(ErrorKind::InvalidConfig, "session: unknown field '" + it.key() + "'");
  }
  SessionConfig c;
  try {
    if (!j.contains("bounds")) throw Error(ErrorKind::InvalidConfig, "session needs bounds");
    const Json& b = j.at("bounds");
    if (b.is_object()) {
      c.bounds.lower = vector_from_json(b.at("lower"));
      c.bounds.upper = vector_from_json(b.at("upper"));
    } else {
      // [[lo, hi], ...] per dimension.
      const auto n = static_cast<Eigen::Index>(b.size());
      c.bounds.lower.resize(n);
      c.bounds.upper.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Json& row = b.at(static_cast<std::size_t>(i));
        if (row.size() != 2) throw Error(ErrorKind::InvalidConfig, "bounds rows must be [lower, upper]");
        c.bounds.lower(i) = row.at(0).get<double>();
        c.bounds.upper(i) = row.at(1).get<double>();
      }
    }
    if (c.bounds.lower.size() != c.bounds.upper.size() || c.bounds.lower.size() == 0)
      throw Error(ErrorKind::InvalidConfig, "bounds need matching non-empty lower and upper");
    if (j.contains("surrogate")) c.surrogate = parse_surrogate_kind(j.at("surrogate").get<std::string>());
    if (j.contains("acquisition")) {
      const Json& a = j.at("acquisition");
      if (a.is_string()) c.acquisition.kind = parse_acquisition_kind(a.get<std::string>());
      else c.acquisition = acquisition_from_json(a);
    }
    read(j, "mixed", c.mixed);
    c.seed = j.contains("seed") && !j.at("seed").is_null() ? j.at("seed").get<std::uint64_t>() : random_seed();
    read(j, "optimize_hyperparameters", c.optimize_hyperparameters);
    if (j.contains("lengthscale") && !j.at("lengthscale").is_null()) c.lengthscale = j.at("lengthscale").get<double>();
    read(j, "variance", c.variance);
    read(j, "reoptimize_every", c.reoptimize_every);
    read(j, "annealing_budget", c.annealing_budget);
    read(j, "bank_size", c.bank_size);
    read(j, "summary_samples", c.summary_samples);
    read(j, "dimension_labels", c.dimension_labels);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("session: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const PendingDuel& d) {
  return Json{{"candidate", to_json(d.candidate)},
              {"reference", to_json(d.reference)},
              {"value", std::isfinite(d.value) ? Json(d.value) : Json(nullptr)},
              {"initial", d.initial}};
}

Json to_json(const SessionSummary& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.table.rows.size(); ++i) {
    const SummaryRow& r = s.table.rows[i];
    Json row{{"x", to_json(r.x)}, {"mean", r.mean}, {"lower", r.lower}, {"upper", r.upper}, {"skewness", r.skewness}};
    if (s.valid_probability) row["valid_probability"] = (*s.valid_probability)(static_cast<Eigen::Index>(i));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", std::move(rows)},
              {"quantity", "f(x) - f(reference)"},
              {"samples", s.table.samples},
              {"seed", s.table.seed},
              {"fit_seed", s.fit_seed},
              {"credible_level", s.table.credible_level},
              {"reference", to_json(s.reference)},
              {"kernel", {{"lengthscales", to_json(s.lengthscales)}, {"variance", s.variance}}},
              {"answers", s.answers}};
}

PreferenceSession::PreferenceSession(std::string id, SessionConfig config)
    : id_(std::move(id)),
      config_(std::move(config)),
      data_(config_.bounds.dim()),
      kernel_(config_.lengthscale ? Eigen::VectorXd(Eigen::VectorXd::Constant(config_.bounds.dim(), *config_.lengthscale))
                                  : Eigen::VectorXd(0.1 * config_.bounds.width()),
              config_.variance) {
  config_.validate();
  events_.push_back(Json{{"type", "created"}, {"config", to_json(config_)}});
}

PreferenceSession PreferenceSession::replay(const std::vector<Json>& events, const std::string& id) {
  if (events.empty() || !events.front().is_object() || events.front().value("type", "") != "created")
    throw Error(ErrorKind::InvalidArgument, "event log must start with a created event");
  SessionConfig config;
  try {
    config = session_config_from_json(field(events.front(), "config"));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("created event: ") + e.what());
  }
  PreferenceSession s(id, std::move(config));
  for (std::size_t i = 1; i < events.size(); ++i) s.apply(events[i]);
  return s;
}

std::pair<Eigen::MatrixXd, DuelMatrix> PreferenceSession::design() const {
  if (config_.mixed) {
    const MixedDataset m = data_.mixed();
    return {m.preferences.points, build_mixed_matrix(m)};
  }
  const PreferenceDataset p = data_.preferences();
  return {p.points, build_duel_matrix(p)};
}

std::uint64_t PreferenceSession::fit_seed(std::size_t answers) const {
  return derive_seed(derive_seed(config_.seed, kFit), answers);
}

std::vector<Json> PreferenceSession::propose() const {
  if (pending_) throw Error(ErrorKind::PendingProposalExists, "session " + id_ + " already has an open duel");
  std::vector<Json> out;
  if (!reference_) {
    gauss::Rng rng(derive_seed(config_.seed, kInit));
    const Eigen::MatrixXd pair = config_.bounds.uniform(2, rng);
    out.push_back(Json{{"type", "proposal"},
                       {"candidate", to_json(Eigen::VectorXd(pair.row(0).transpose()))},
                       {"reference", to_json(Eigen::VectorXd(pair.row(1).transpose()))},
                       {"value", nullptr},
                       {"initial", true},
                       {"answers", answers_}});
    return out;
  }

  const auto [points, duels] = design();
  RbfArdKernel kernel = kernel_;
  if (config_.optimize_hyperparameters && (!tuned_at_ || answers_ - *tuned_at_ >= config_.reoptimize_every)) {
    gauss::Rng rng(derive_seed(derive_seed(config_.seed, kTune), answers_));
    kernel = tune_kernel(config_.surrogate, points, duels, kernel_, config_.bounds, config_.annealing_budget, rng);
    out.push_back(Json{{"type", "refit"},
                       {"lengthscales", to_json(kernel.lengthscales())},
                       {"variance", kernel.variance()},
                       {"answers", answers_}});
  }
  gauss::Rng rng(fit_seed(answers_));
  const auto model = fit_surrogate(config_.surrogate, points, duels, kernel, rng, config_.bank_size);
  const std::uint64_t round_seed = derive_seed(config_.seed ^ config_.acquisition.seed, kRound + answers_);
  const DuelProposal p = optimize_acquisition(*model, config_.acquisition, *reference_, config_.bounds, round_seed);
  out.push_back(Json{{"type", "proposal"},
                     {"candidate", to_json(p.candidate)},
                     {"reference", to_json(p.reference)},
                     {"value", std::isfinite(p.value) ? Json(p.value) : Json(nullptr)},
                     {"initial", false},
                     {"answers", answers_}});
  return out;
}

Json PreferenceSession::answer_event(DuelOutcome outcome) const {
  if (!pending_) throw Error(ErrorKind::NoPendingProposal, "session " + id_ + " has no open duel");
  if (outcome == DuelOutcome::CandidateNonValid && !config_.mixed)
    throw Error(ErrorKind::NonValidNotEnabled, "session " + id_ + " was created without mixed mode");
  return Json{{"type", "answer"}, {"outcome", std::string(to_string(outcome))}, {"answers", answers_}};
}

void PreferenceSession::apply(const Json& event) {
  if (!event.is_object()) throw Error(ErrorKind::InvalidArgument, "event must be an object");
  const std::string type = event.value("type", "");
  try {
    if (type == "refit") {
      kernel_ = RbfArdKernel(vector_from_json(field(event, "lengthscales")), field(event, "variance").get<double>());
      if (kernel_.dim() != config_.bounds.dim()) throw Error(ErrorKind::InvalidArgument, "refit dimension mismatch");
      tuned_at_ = answers_;
    } else if (type == "proposal") {
      if (pending_) throw Error(ErrorKind::InvalidArgument, "proposal while a duel is open");
      PendingDuel d;
      d.candidate = vector_from_json(field(event, "candidate"));
      d.reference = vector_from_json(field(event, "reference"));
      const Json& v = field(event, "value");
      d.value = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
      d.initial = event.value("initial", false);
      if (d.candidate.size() != config_.bounds.dim() || d.reference.size() != config_.bounds.dim())
        throw Error(ErrorKind::InvalidArgument, "proposal dimension mismatch");
      pending_ = std::move(d);
    } else if (type == "answer") {
      if (!pending_) throw Error(ErrorKind::InvalidArgument, "answer without an open duel");
      const DuelOutcome outcome = parse_duel_outcome(field(event, "outcome").get<std::string>());
      if (outcome == DuelOutcome::CandidateNonValid && !config_.mixed)
        throw Error(ErrorKind::InvalidArgument, "non-valid answer in a preference-only session");
      apply_answer(outcome);
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown event type '" + type + "'");
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("event: ") + e.what());
  }
  events_.push_back(event);
}

void PreferenceSession::apply_answer(DuelOutcome outcome) {
  const PendingDuel d = *pending_;
  if (outcome == DuelOutcome::CandidateNonValid) {
    data_.add_label(d.candidate, false);
    if (!reference_) reference_ = d.reference;
  } else {
    if (config_.mixed) {
      data_.add_label(d.candidate, true);
      data_.add_label(d.reference, true);
    }
    const bool candidate_wins = outcome == DuelOutcome::CandidateWins;
    if (d.candidate != d.reference) {
      if (candidate_wins) data_.add_duel(d.candidate, d.reference);
      else data_.add_duel(d.reference, d.candidate);
    }
    reference_ = candidate_wins ? d.candidate : d.reference;
  }
  ++answers_;
  pending_.reset();
}

SessionSummary PreferenceSession::summary(const Eigen::MatrixXd& query) const {
  if (!reference_) throw Error(ErrorKind::InvalidArgument, "session " + id_ + " has no answered duel yet");
  if (query.rows() > 0 && query.cols() != config_.bounds.dim())
    throw Error(ErrorKind::InvalidArgument, "query points have the wrong dimension");
  const auto [points, duels] = design();
  SessionSummary out;
  out.reference = *reference_;
  out.lengthscales = kernel_.lengthscales();
  out.variance = kernel_.variance();
  out.answers = answers_;
  out.fit_seed = fit_seed(answers_);
  gauss::Rng rng(out.fit_seed);
  const auto model = fit_surrogate(config_.surrogate, points, duels, kernel_, rng, config_.bank_size);
  const Eigen::MatrixXd q = query.rows() > 0 ? query : Eigen::MatrixXd(0, config_.bounds.dim());
  out.table = summarize(*model, q, *reference_, config_.summary_samples,
                        derive_seed(derive_seed(config_.seed, kSummary), answers_), config_.acquisition.credible_level);
  if (config_.mixed) out.valid_probability = valid_probability(*model, q, out.table.seed, config_.summary_samples);
  return out;
}

Json PreferenceSession::snapshot() const {
  Json duels = Json::array();
  for (const Duel& d : data_.duels()) duels.push_back({d.winner, d.loser});
  const MixedDataset all = data_.mixed();
  Json labels = Json::array();
  for (bool v : all.valid) labels.push_back(v);
  return Json{{"id", id_},
              {"config", to_json(config_)},
              {"answers", answers_},
              {"reference", reference_ ? to_json(*reference_) : Json(nullptr)},
              {"pending", pending_ ? to_json(*pending_) : Json(nullptr)},
              {"kernel", kernel_json(kernel_)},
              {"data", {{"points", to_json(data_.points())}, {"duels", std::move(duels)}, {"labels", std::move(labels)}}},
              {"events", events_}};
}

SessionManager::SessionManager(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) lines.push_back(line);
    }
    std::vector<Json> events;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        events.push_back(Json::parse(lines[i]));
      } catch (const Json::exception&) {
        // A torn final line from an interrupted write is dropped.
        if (i + 1 == lines.size()) {
          log_warning("dropping incomplete last event in " + path.string());
          break;
        }
        throw Error(ErrorKind::IoError, "corrupt event log " + path.string());
      }
    }
    const std::string id = path.stem().string();
    try {
      sessions_.emplace(id, std::make_shared<Entry>(PreferenceSession::replay(events, id)));
    } catch (const Error& e) {
      throw Error(ErrorKind::IoError, "cannot replay " + path.string() + ": " + e.what());
    }
  }
}

std::string SessionManager::fresh_id() {
  std::random_device rd;
  for (;;) {
    std::ostringstream s;
    s << std::hex;
    s.width(8);
    s.fill('0');
    s << rd();
    s.width(8);
    s << rd();
    std::string id = s.str();
    if (!sessions_.contains(id) && !std::filesystem::exists(dir_ / (id + ".jsonl"))) return id;
  }
}

void SessionManager::append(const std::string& id, const std::vector<Json>& events) const {
  std::ofstream out(dir_ / (id + ".jsonl"), std::ios::app);
  for (const Json& e : events) out << e.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "cannot write event log for session " + id);
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "no session '" + id + "'");
  return it->second;
}

std::string SessionManager::create(const SessionConfig& config) {
  config.validate();
  std::unique_lock lock(map_mutex_);
  const std::string id = fresh_id();
  auto entry = std::make_shared<Entry>(PreferenceSession(id, config));
  append(id, entry->session.events());
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::string SessionManager::import_events(const std::vector<Json>& events) {
  std::unique_lock lock(map_mutex_);
  const std::string id = fresh_id();
  auto entry = std::make_shared<Entry>(PreferenceSession::replay(events, id));
  append(id, entry->session.events());
  sessions_.emplace(id, std::move(entry));
  return id;
}

PendingDuel SessionManager::next_duel(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  const std::vector<Json> events = entry->session.propose();
  append(id, events);
  for (const Json& e : events) entry->session.apply(e);
  return *entry->session.pending();
}

AnswerResult SessionManager::answer(const std::string& id, DuelOutcome outcome) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  const Json event = entry->session.answer_event(outcome);
  append(id, {event});
  entry->session.apply(event);
  return AnswerResult{*entry->session.reference(), entry->session.answers(), outcome};
}

SessionSummary SessionManager::summary(const std::string& id, const Eigen::MatrixXd& query) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.summary(query);
}

Json SessionManager::snapshot(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.snapshot();
}

Box SessionManager::bounds(const std::string& id) const {
  const auto entry = find(id);
  return entry->session.config().bounds;
}

std::vector<std::string> SessionManager::list() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> ids;
  ids.reserve(sessions_.size());
  for (const auto& [id, entry] : sessions_) ids.push_back(id);
  return ids;
}

Eigen::MatrixXd box_grid(const Box& bounds, std::size_t points_per_dim) {
  const Eigen::Index d = bounds.dim();
  const auto n = static_cast<Eigen::Index>(points_per_dim);
  if (n == 0) return Eigen::MatrixXd(0, d);
  Eigen::Index total = 1;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (total > 1'000'000 / std::max<Eigen::Index>(n, 1))
      throw Error(ErrorKind::InvalidArgument, "grid has more than a million points");
    total *= n;
  }
  Eigen::MatrixXd out(total, d);
  for (Eigen::Index row = 0; row < total; ++row) {
    Eigen::Index rest = row;
    for (Eigen::Index k = d - 1; k >= 0; --k) {
      const Eigen::Index i = rest % n;
      rest /= n;
      out(row, k) = n == 1 ? 0.5 * (bounds.lower(k) + bounds.upper(k))
                           : bounds.lower(k) + (bounds.upper(k) - bounds.lower(k)) * static_cast<double>(i) /
                                                   static_cast<double>(n - 1);
    }
  }
  return out;
}

}  // namespace skewpbo
