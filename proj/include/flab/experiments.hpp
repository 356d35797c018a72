#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flab/cluster.hpp"
#include "flab/gaussian.hpp"
#include "flab/io.hpp"

namespace flab::experiments {

using io::Json;

struct BoundsOptions {
  std::size_t max_k = 5;
  double max_r = 4;
  std::size_t counting_max_size = 20;
  std::vector<std::size_t> degrees{2, 3, 4};
  std::optional<Json> prop1_other;  // second state for the covariance comparison
};

struct ExperimentConfig {
  std::string experiment;
  std::optional<GlobalState> state;
  std::optional<Metric> metric;
  std::vector<std::size_t> sizes;
  TensorWord word;
  std::vector<std::size_t> degrees;  // cluster-verify: prefixes of the word
  TensorWord prefix, suffix;         // ccr-decay
  std::vector<SiteOperator> pair;    // ccr-decay: (a, b)
  BoundsOptions bounds;
  SearchOptions search;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"moments", "converge", "ccr-decay", "cluster-verify", "bounds"};
  return names;
}

inline std::vector<std::size_t> parse_sizes(const Json& j, const char* what) {
  if (!j.is_array()) io::config_error(std::string(what) + " must be an array of positive integers");
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      io::config_error(std::string(what) + " must hold positive integers");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

/// The experiment named on the command line takes precedence over the
/// config's own "experiment" field.
inline ExperimentConfig parse_config(const Json& j, const std::string& experiment = {}) {
  if (!j.is_object()) io::config_error("config must be a JSON object");
  ExperimentConfig c;
  c.experiment = experiment.empty() ? io::field(j, "experiment").get<std::string>() : experiment;
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    io::config_error("unknown experiment '" + c.experiment + "'");
  }
  c.state = io::parse_state(io::field(j, "state"));
  c.metric = io::parse_metric(j.value("metric", Json()), *c.state);
  c.sizes = parse_sizes(io::field(j, "sizes"), "sizes");
  if (c.sizes.empty()) io::config_error("sizes must not be empty");
  for (std::size_t i = 1; i < c.sizes.size(); ++i) {
    if (c.sizes[i] <= c.sizes[i - 1]) io::config_error("sizes must be strictly ascending");
  }
  if (j.contains("word")) c.word = io::parse_word(j.at("word"));
  const bool needs_word = c.experiment == "moments" || c.experiment == "converge" || c.experiment == "cluster-verify";
  if (needs_word && c.word.degree() == 0) io::config_error("experiment needs a nonempty 'word'");
  if (c.word.degree() > 0 && c.word.dim() != c.state->site_dim()) {
    io::config_error("word dimension differs from the state's site dimension");
  }
  c.degrees = j.contains("degrees") ? parse_sizes(j.at("degrees"), "degrees")
                                    : std::vector<std::size_t>{c.word.degree()};
  if (c.experiment == "ccr-decay") {
    if (j.contains("prefix")) c.prefix = io::parse_word(j.at("prefix"));
    if (j.contains("suffix")) c.suffix = io::parse_word(j.at("suffix"));
    const Json& pair = io::field(j, "pair");
    if (!pair.is_array() || pair.size() != 2) io::config_error("'pair' must hold two operators");
    for (const auto& p : pair) c.pair.push_back(io::parse_operator(p));
  }
  if (j.contains("bounds")) {
    const Json& b = j.at("bounds");
    c.bounds.max_k = b.value("max_k", c.bounds.max_k);
    c.bounds.max_r = b.value("max_r", c.bounds.max_r);
    c.bounds.counting_max_size = b.value("counting_max_size", c.bounds.counting_max_size);
    if (b.contains("degrees")) c.bounds.degrees = parse_sizes(b.at("degrees"), "bounds.degrees");
    if (b.contains("prop1_other")) c.bounds.prop1_other = b.at("prop1_other");
  }
  c.seed = j.value("seed", std::uint64_t{0});
  c.search.seed ^= c.seed;
  if (j.contains("search")) {
    const Json& s = j.at("search");
    c.search.budget = s.value("budget", c.search.budget);
    c.search.sweeps = s.value("sweeps", c.search.sweeps);
    c.search.trials = s.value("trials", c.search.trials);
    c.search.max_structured = s.value("max_structured", c.search.max_structured);
  }
  const long long threads = j.value("threads", 1LL);
  if (threads < 1) io::config_error("threads must be positive");
  c.threads = static_cast<unsigned>(threads);
  c.out = j.value("out", std::string());
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& experiment = {}) {
  std::ifstream in(path);
  if (!in) io::config_error("cannot read config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    io::config_error(std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_config(j, experiment);
  } catch (const Json::exception& e) {
    io::config_error(std::string("bad config value: ") + e.what());
  }
}

struct RunResult {
  std::string output;
  int exit_code = 0;
};

inline int exit_code_for(ErrorKind kind) { return kind == ErrorKind::cost_guard ? 3 : 2; }

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline TensorWord centered_prefix(const TensorWord& w, std::size_t n, const SiteState& omega) {
  require(n <= w.degree(), ErrorKind::config, "requested degree exceeds the word length");
  TensorWord out;
  for (std::size_t i = 0; i < n; ++i) out.factors.push_back(center(w.factors[i], omega));
  return out;
}

}  // namespace detail

/// region_size,n,moment_re,moment_im
inline RunResult run_moments(const ExperimentConfig& c) {
  const Executor exec(c.threads);
  std::vector<Complex> values(c.sizes.size());
  exec.parallel_for(c.sizes.size(), [&](std::size_t i) {
    values[i] = induced_moment(*c.state, io::region_of_size(c.sizes[i], *c.metric), c.word);
  });
  std::string out = "region_size,n,moment_re,moment_im\n";
  for (std::size_t i = 0; i < c.sizes.size(); ++i) {
    out += std::to_string(c.sizes[i]) + "," + std::to_string(c.word.degree()) + "," +
           detail::num(values[i].real()) + "," + detail::num(values[i].imag()) + "\n";
  }
  return {out, 0};
}

/// Induced moments against the quasi-free moment of the site-averaged
/// covariance. One row per size; rows are computed in parallel and emitted
/// in config order.
inline RunResult run_converge(const ExperimentConfig& c) {
  const Executor exec(c.threads);
  std::vector<std::pair<Complex, Complex>> values(c.sizes.size());
  exec.parallel_for(c.sizes.size(), [&](std::size_t i) {
    const Region x = io::region_of_size(c.sizes[i], *c.metric);
    const Covariance w = covariance_from_state(average_restriction(*c.state, x));
    values[i] = {induced_moment(*c.state, x, c.word), wick_moment(w, c.word)};
  });
  std::string out = "region_size,n,moment_re,moment_im,wick_re,wick_im,abs_diff\n";
  for (std::size_t i = 0; i < c.sizes.size(); ++i) {
    const auto& [m, w] = values[i];
    out += std::to_string(c.sizes[i]) + "," + std::to_string(c.word.degree()) + "," + detail::num(m.real()) +
           "," + detail::num(m.imag()) + "," + detail::num(w.real()) + "," + detail::num(w.imag()) + "," +
           detail::num(std::abs(m - w)) + "\n";
  }
  return {out, 0};
}

/// region_size,value_abs,bound,ratio,pass with ratio = value_abs |X|^{1/2}.
inline RunResult run_ccr_decay(const ExperimentConfig& c) {
  const Executor exec(c.threads);
  std::vector<Region> family;
  for (std::size_t s : c.sizes) family.push_back(io::region_of_size(s, *c.metric));
  const double c_prev = ccr_constant(*c.state, family, c.prefix, c.pair[0], c.pair[1], c.suffix, c.search, exec);
  std::string out = "region_size,value_abs,bound,ratio,pass\n";
  bool all = true;
  for (const auto& x : family) {
    const auto r = ccr_decay_check(*c.state, x, c.prefix, c.pair[0], c.pair[1], c.suffix, c_prev, exec);
    const double v = std::abs(r.value);
    all = all && r.pass;
    out += std::to_string(x.size()) + "," + detail::num(v) + "," + detail::num(r.bound) + "," +
           detail::num(v * std::sqrt(static_cast<double>(x.size()))) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return {out, all ? 0 : 1};
}

/// region_size,n,residual for each size and each requested word degree.
inline RunResult run_cluster_verify(const ExperimentConfig& c) {
  const Executor exec(c.threads);
  const SiteState omega = single_site_restriction(*c.state);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t s : c.sizes) {
    for (std::size_t n : c.degrees) jobs.emplace_back(s, n);
  }
  std::vector<double> residuals(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Region x = io::region_of_size(jobs[i].first, *c.metric);
    residuals[i] = decomposition_check(*c.state, x, detail::centered_prefix(c.word, jobs[i].second, omega), exec).residual;
  }
  std::string out = "region_size,n,residual\n";
  bool all = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    all = all && residuals[i] <= 1e-9;
    out += std::to_string(jobs[i].first) + "," + std::to_string(jobs[i].second) + "," + detail::num(residuals[i]) + "\n";
  }
  return {out, all ? 0 : 1};
}

/// One JSON record {name, lhs, rhs, pass} per check. Exit 0 iff all pass.
inline RunResult run_bounds(const ExperimentConfig& c) {
  const Executor exec(c.threads);
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  bool all = true;
  auto record = [&](const std::string& name, double lhs, double rhs, bool pass) {
    records.push_back({{"name", name}, {"lhs", lhs}, {"rhs", rhs}, {"pass", pass}});
    all = all && pass;
  };
  const Metric& metric = *c.metric;
  const Region origin = io::region_of_size(1, metric);
  for (std::size_t s : c.sizes) {
    if (s > c.bounds.counting_max_size) continue;
    const Region x = io::region_of_size(s, metric);
    for (std::size_t k = 2; k <= std::min(c.bounds.max_k, s); ++k) {
      for (int r = 1; r <= static_cast<int>(c.bounds.max_r); ++r) {
        const double lhs = static_cast<double>(count_subsets_with_spread(x, k, r));
        const double nr = static_cast<double>(ball_count(metric, r, x));
        const double rhs = static_cast<double>(q_sequence(static_cast<int>(k))) *
                           std::pow(static_cast<double>(s) * nr, 0.5 * static_cast<double>(k));
        record("counting/X=" + std::to_string(s) + "/k=" + std::to_string(k) + "/r=" + std::to_string(r), lhs,
               rhs, lhs <= rhs);
      }
    }
  }
  for (std::size_t n : c.bounds.degrees) {
    const double bhat = b_hat_bound(static_cast<int>(n), metric);
    for (std::size_t s : c.sizes) {
      if (std::pow(static_cast<double>(s), static_cast<double>(n)) > kBnCostGuard) continue;
      const double lhs = b_n_quantity(io::region_of_size(s, metric), n, exec);
      const double rhs = bhat * std::pow(static_cast<double>(s), 0.5 * static_cast<double>(n));
      record("b_n/X=" + std::to_string(s) + "/n=" + std::to_string(n), lhs, rhs, lhs <= rhs);
    }
  }
  for (std::size_t n : c.bounds.degrees) {
    if (n > 6) continue;
    for (std::size_t s : c.sizes) {
      const Region x = io::region_of_size(s, metric);
      const auto t = lemma_topol_bound_check(induced_functional(*c.state, x), n,
                                             average_restriction(*c.state, x), c.search);
      record("topol/X=" + std::to_string(s) + "/n=" + std::to_string(n), t.nu_n, t.rhs, t.pass);
    }
  }
  const std::size_t wn = c.word.degree();
  if (wn >= 2 && wn % 2 == 0 && wn <= 8) {
    const SiteState here = average_restriction(*c.state, origin);
    const Eigen::Index d = here.dim();
    const SiteState other = c.bounds.prop1_other
                                ? io::parse_state(*c.bounds.prop1_other).site_marginal(0)
                                : SiteState(Matrix::Identity(d, d) / static_cast<double>(d));
    const auto p = prop1_bound_check(covariance_from_state(here), covariance_from_state(other), c.word, c.search);
    record("prop1/n=" + std::to_string(wn), p.lhs, p.rhs_padded, p.pass);
  }
  return {records.dump(2) + "\n", all ? 0 : 1};
}

inline RunResult run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "moments") return run_moments(c);
  if (c.experiment == "converge") return run_converge(c);
  if (c.experiment == "ccr-decay") return run_ccr_decay(c);
  if (c.experiment == "cluster-verify") return run_cluster_verify(c);
  if (c.experiment == "bounds") return run_bounds(c);
  io::config_error("unknown experiment '" + c.experiment + "'");
}

}  // namespace flab::experiments
