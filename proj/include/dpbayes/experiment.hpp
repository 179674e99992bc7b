#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpbayes/error.hpp"
#include "dpbayes/fourier.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/io.hpp"
#include "dpbayes/laplace.hpp"
#include "dpbayes/metrics.hpp"
#include "dpbayes/naive_bayes.hpp"
#include "dpbayes/random.hpp"
#include "dpbayes/regress.hpp"
#include "dpbayes/sampler.hpp"

namespace dpbayes {

struct ExperimentConfig {
  std::string task = "nb";  // nb | linreg | mechanism | verify
  std::vector<std::string> mechanisms;
  std::vector<double> grid;  // epsilon for nb, prior precision b for linreg
  std::size_t repeats = 100;
  double train_fraction = 0.05;
  std::uint64_t seed = 1;
  std::string out;

  // naive Bayes
  std::size_t features = 16;
  std::size_t records = 1000;
  double fourier_t = std::numbers::ln10;
  std::size_t mc_samples = 1000;
  BetaParams prior{1.0, 1.0};
  std::size_t fourier_max_attempts = 100;

  // linear regression
  std::size_t dims = 5;
  double sigma2 = 1.0;
  double noise_sd = 1.0;  // synthetic generator noise
  std::optional<double> radius;  // unset: 10 / sqrt(b)
  std::size_t regression_samples = 1000;
  std::string data_path;  // empty: synthetic data

  static ExperimentConfig defaults_for(const std::string& task) {
    ExperimentConfig c;
    c.task = task;
    if (task == "linreg") {
      c.mechanisms = {"none", "sampler"};
      c.grid = {0.1, 1.0, 10.0};
      c.repeats = 50;
      c.train_fraction = 0.1;
      c.records = 2000;
    } else {
      c.mechanisms = {"none", "laplace", "fourier", "sampler"};
      c.grid = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    }
    return c;
  }

  void validate() const {
    require(task == "nb" || task == "linreg" || task == "mechanism" || task == "verify",
            ErrorCode::InvalidArgument, "unknown task '" + task + "'");
    require(!grid.empty(), ErrorCode::InvalidArgument, "grid is empty");
    for (double g : grid)
      require(g > 0.0 && std::isfinite(g), ErrorCode::InvalidArgument,
              "grid values must be positive and finite");
    require(repeats >= 1, ErrorCode::InvalidArgument, "repeats must be at least 1");
    require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::InvalidArgument,
            "train fraction must be in (0, 1)");
    require(!mechanisms.empty(), ErrorCode::InvalidArgument, "no mechanisms selected");
    const std::vector<std::string> allowed =
        task == "linreg" ? std::vector<std::string>{"none", "sampler"}
                         : std::vector<std::string>{"none", "laplace", "fourier", "sampler"};
    for (const auto& m : mechanisms)
      require(std::find(allowed.begin(), allowed.end(), m) != allowed.end(),
              ErrorCode::InvalidArgument, "mechanism '" + m + "' not available for task " + task);
    require(mc_samples >= 1 && regression_samples >= 1, ErrorCode::InvalidArgument,
            "sample counts must be at least 1");
    require(fourier_t > 0.0, ErrorCode::InvalidT, "fourier t must be positive");
    require(prior.valid(), ErrorCode::InvalidArgument, "prior must be a proper Beta");
    require(sigma2 > 0.0, ErrorCode::InvalidArgument, "sigma2 must be positive");
    require(noise_sd > 0.0, ErrorCode::InvalidArgument, "noise sd must be positive");
    require(!radius || *radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  }
};

struct MetricsRow {
  std::string mechanism;
  double param = 0.0;
  std::size_t repeat = 0;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::size_t stealth_reruns = 0;   // extra fourier releases beyond the first
  std::size_t stealth_clamped = 0;  // releases that fell back to clamping
};

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "mechanism,param,repeat,metric,value\n";
  for (const auto& r : rows)
    out << r.mechanism << ',' << format_double(r.param) << ',' << r.repeat << ',' << r.metric << ','
        << format_double(r.value) << '\n';
}

namespace detail {

enum StreamKey : std::uint64_t { kSplitKey = 1, kLaplaceKey, kFourierKey, kSamplerKey, kDataKey };

/// Mean and standard error of one (mechanism, param, metric) cell.
inline MeanStat cell_stat(const std::vector<MetricsRow>& rows, const std::string& mechanism,
                          double param) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.mechanism == mechanism && r.param == param) v.push_back(r.value);
  return mean_and_se(v);
}

}  // namespace detail

inline MeanStat summarize(const ExperimentResult& result, const std::string& mechanism, double param) {
  return detail::cell_stat(result.rows, mechanism, param);
}

/// Naive Bayes sweep: per repeat a fresh train/test split of one synthetic
/// dataset, then test accuracy of each mechanism at each epsilon.
inline ExperimentResult run_nb_experiment(const ExperimentConfig& config,
                                          std::optional<Dataset> dataset = std::nullopt) {
  config.validate();
  Dataset data = dataset ? std::move(*dataset)
                         : synth_nb(config.features, config.records,
                                    derive_seed(config.seed, {detail::kDataKey}))
                               .data;
  require(data.dimension() >= 2, ErrorCode::DimensionMismatch, "need a class and at least one feature");
  const BayesNetGraph graph = BayesNetGraph::naive_bayes(data.dimension() - 1);
  const BetaTable priors = make_priors(graph, config.prior, {});
  const std::size_t train_count = train_count_for(data.size(), config.train_fraction);

  const std::size_t grid = config.grid.size();
  const std::size_t mechs = config.mechanisms.size();
  // acc[m][g][r]
  std::vector<std::vector<std::vector<double>>> acc(
      mechs, std::vector<std::vector<double>>(grid, std::vector<double>(config.repeats, 0.0)));
  ExperimentResult result;

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto split =
        split_indices(data.size(), train_count, derive_seed(config.seed, {detail::kSplitKey, r}));
    const Dataset train = data.subset(split.train);
    const Dataset test = data.subset(split.test);
    std::vector<int> labels;
    labels.reserve(test.size());
    for (Record x : test.records()) labels.push_back(bit(x, 0) ? 1 : 0);
    const UpdateVector updates = compute_updates(graph, train);
    const BetaTable exact = posterior_params(priors, updates);

    auto closed_form_accuracy = [&](const BetaTable& post) {
      std::vector<double> p;
      p.reserve(test.size());
      for (Record x : test.records()) p.push_back(nb_predictive_closed_form(post, x));
      return accuracy(p, labels);
    };
    const double baseline = closed_form_accuracy(exact);

    for (std::size_t m = 0; m < mechs; ++m) {
      const std::string& mech = config.mechanisms[m];
      for (std::size_t g = 0; g < grid; ++g) {
        const double eps = config.grid[g];
        double value = 0.0;
        if (mech == "none") {
          value = baseline;
        } else if (mech == "laplace") {
          const auto spec = LaplaceNoiseSpec::for_graph(graph, eps, train.size());
          const auto noisy = perturb_updates(updates, spec, derive_seed(config.seed, {detail::kLaplaceKey, g, r}));
          value = closed_form_accuracy(posterior_params(priors, noisy));
        } else if (mech == "fourier") {
          const auto rel = release_fourier_posterior(train, graph, priors, eps, config.fourier_t,
                                                     derive_seed(config.seed, {detail::kFourierKey, g, r}),
                                                     config.fourier_max_attempts);
          result.stealth_reruns += rel.attempts - 1;
          if (rel.clamped) ++result.stealth_clamped;
          value = closed_form_accuracy(rel.params);
        } else {  // sampler
          if (trim_level(eps) >= 0.5) {
            // No trim interval exists; the release is the constant theta = 1/2.
            const std::vector<double> p(test.size(), 0.5);
            value = accuracy(p, labels);
          } else {
            const auto draws = trimmed_posterior_draws(exact, eps, config.mc_samples,
                                                       derive_seed(config.seed, {detail::kSamplerKey, g, r}));
            std::vector<double> p;
            p.reserve(test.size());
            for (Record x : test.records()) p.push_back(predictive_from_draws(graph, draws, x, 0));
            value = accuracy(p, labels);
          }
        }
        acc[m][g][r] = value;
      }
    }
  }

  for (std::size_t m = 0; m < mechs; ++m)
    for (std::size_t g = 0; g < grid; ++g)
      for (std::size_t r = 0; r < config.repeats; ++r)
        result.rows.push_back({config.mechanisms[m], config.grid[g], r, "accuracy", acc[m][g][r]});
  return result;
}

/// y = x w + N(0, noise_sd^2) with x ~ N(0, I) and w ~ N(0, I).
inline RegressionTable synth_linreg(std::size_t dims, std::size_t n, std::uint64_t seed,
                                    double noise_sd = 1.0) {
  require(dims >= 1 && n >= 2, ErrorCode::InvalidArgument, "need d >= 1 and n >= 2");
  Rng rng = substream(seed, {});
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(dims));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = normal(rng);
  RegressionTable t{Eigen::MatrixXd(static_cast<Eigen::Index>(n), w.size()),
                    Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < t.x.rows(); ++i) {
    for (Eigen::Index k = 0; k < w.size(); ++k) t.x(i, k) = normal(rng);
    t.y[i] = t.x.row(i).dot(w) + noise_sd * normal(rng);
  }
  return t;
}

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

inline Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  return out;
}

/// Regression sweep over prior precision b. Within a repeat every b sees the
/// same split and the sampler the same seed; "none" scores the posterior
/// mean, "sampler" the mean of `regression_samples` truncated-posterior draws.
inline ExperimentResult run_linreg_experiment(const ExperimentConfig& config,
                                              std::optional<RegressionTable> table = std::nullopt) {
  config.validate();
  RegressionTable raw = table ? std::move(*table)
                              : synth_linreg(config.dims, config.records,
                                             derive_seed(config.seed, {detail::kDataKey}), config.noise_sd);
  const RegressionData all = ingest(raw.x, raw.y, config.sigma2);
  const auto n = static_cast<std::size_t>(all.rows());
  const std::size_t train_count = train_count_for(n, config.train_fraction);

  const std::size_t grid = config.grid.size();
  const std::size_t mechs = config.mechanisms.size();
  std::vector<std::vector<std::vector<double>>> err(
      mechs, std::vector<std::vector<double>>(grid, std::vector<double>(config.repeats, 0.0)));

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto split = split_indices(n, train_count, derive_seed(config.seed, {detail::kSplitKey, r}));
    const RegressionData train{select_rows(all.x, split.train), select_rows(all.y, split.train), all.sigma2};
    const Eigen::MatrixXd x_test = select_rows(all.x, split.test);
    const Eigen::VectorXd y_test = select_rows(all.y, split.test);
    for (std::size_t g = 0; g < grid; ++g) {
      const double b = config.grid[g];
      const GaussianPosterior post = posterior(train, b, config.radius.value_or(default_radius(b)));
      for (std::size_t m = 0; m < mechs; ++m) {
        if (config.mechanisms[m] == "none") {
          err[m][g][r] = mse(x_test * post.mu, y_test);
        } else {
          err[m][g][r] = predictive_mse(post, x_test, y_test, config.regression_samples,
                                        derive_seed(config.seed, {detail::kSamplerKey, r}));
        }
      }
    }
  }

  ExperimentResult result;
  for (std::size_t m = 0; m < mechs; ++m)
    for (std::size_t g = 0; g < grid; ++g)
      for (std::size_t r = 0; r < config.repeats; ++r)
        result.rows.push_back({config.mechanisms[m], config.grid[g], r, "mse", err[m][g][r]});
  return result;
}

}  // namespace dpbayes
