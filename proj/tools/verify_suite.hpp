#pragma once

// Fast self-check run by `dpbayes verify`.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

#include "dpbayes/dpbayes.hpp"

namespace dpbayes::cli {

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double limit = 0.0;
};

namespace detail {

inline Dataset uniform_records(std::size_t k, std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, {});
  Dataset d(k);
  for (std::size_t r = 0; r < n; ++r) d.add(rng() & low_mask(k));
  return d;
}

inline CheckResult at_most(std::string name, double observed, double limit) {
  return {std::move(name), observed <= limit, observed, limit};
}

inline CheckResult sensitivity_check() {
  double worst = 0.0;
  for (std::size_t k = 1; k <= 3; ++k)
    for (const auto& g : enumerate_dags(k)) worst = std::max(worst, exhaustive_sensitivity(g, 2) / sensitivity(g));
  return at_most("sensitivity_exhaustive_ratio", worst, 1.0);
}

inline CheckResult laplace_ratio_check(std::uint64_t seed) {
  const auto g = BayesNetGraph::chain(3);
  const std::size_t dim = 2 * entry_count(g);
  Rng rng = substream(seed, {1});
  std::vector<std::vector<double>> shifts;
  std::vector<std::vector<double>> points;
  for (int k = 0; k < 200; ++k) shifts.push_back(random_shift(dim, sensitivity(g), rng));
  const double scale = LaplaceNoiseSpec::for_graph(g, 1.0, 10).scale;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> z(dim);
    for (double& v : z) v = laplace_from_uniform(scale, uniform01(rng));
    points.push_back(std::move(z));
  }
  const auto r = laplace_density_ratio_check(sensitivity(g), 1.0, scale, points, shifts);
  return at_most("laplace_log_ratio_minus_epsilon", r.max_log_ratio_observed - 1.0, kRatioTolerance);
}

inline CheckResult fourier_transform_check(std::uint64_t seed) {
  const auto data = uniform_records(8, 400, seed);
  const auto dense = dense_walsh_coefficients(build_table(data));
  double worst = 0.0;
  for (FourierIndex g = 0; g < dense.size(); ++g)
    worst = std::max(worst, std::abs(fourier_coefficient(data, g) - dense[g]));
  return at_most("fourier_streaming_vs_dense", worst, 1e-9);
}

inline CheckResult fourier_reconstruction_check(std::uint64_t seed) {
  const auto g = BayesNetGraph(5, {{}, {0}, {0, 1}, {2}, {1, 3}});
  const auto data = uniform_records(5, 300, seed);
  const auto coeffs = exact_coefficients(data, downward_closure(g));
  const auto table = build_table(data);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto h = reconstruct_marginal(coeffs, i, g);
    const auto direct = project_marginal(table, g.family_mask(i));
    for (std::size_t c = 0; c < h.cells.size(); ++c) worst = std::max(worst, std::abs(h.cells[c] - direct.at(c)));
  }
  return at_most("fourier_reconstruction_exact", worst, 1e-9);
}

inline CheckResult fourier_consistency_check(std::uint64_t seed) {
  const auto g = BayesNetGraph::naive_bayes(6);
  const auto data = uniform_records(7, 100, seed);
  const auto hs = reconstruct_all(release_coefficients(data, downward_closure(g), 1.0, 2.3, seed), g);
  double worst = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const VariableMask shared = hs[i].variables & hs[j].variables;
      const auto a = marginalize(hs[i], shared);
      const auto b = marginalize(hs[j], shared);
      for (std::size_t c = 0; c < a.cells.size(); ++c) worst = std::max(worst, std::abs(a.cells[c] - b.cells[c]));
    }
  return at_most("fourier_shared_marginals", worst, 1e-9);
}

inline CheckResult softmax_check(std::uint64_t seed) {
  Rng rng = substream(seed, {2});
  std::vector<std::vector<double>> pts;
  std::vector<double> u;
  for (int k = 0; k < 500; ++k) {
    pts.push_back({static_cast<double>(k)});
    u.push_back(-10.0 * uniform01(rng));
  }
  const auto grid = GridSpec::uniform(pts);
  const auto p = sampling_probabilities(grid, u, 1.5, {SensitivityKind::Lipschitz, 1.0});
  double z = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) z += std::exp(0.75 * u[k]) * grid.prior_mass[k];
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    worst = std::max(worst, std::abs(p[k] - std::exp(0.75 * u[k]) * grid.prior_mass[k] / z));
  return at_most("exp_mechanism_softmax", worst, 1e-12);
}

inline CheckResult kl_check(std::uint64_t seed) {
  Rng rng = substream(seed, {3});
  boost::math::quadrature::tanh_sinh<double> integrator;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const BetaParams p{0.5 + 49.5 * uniform01(rng), 0.5 + 49.5 * uniform01(rng)};
    const BetaParams q{0.5 + 49.5 * uniform01(rng), 0.5 + 49.5 * uniform01(rng)};
    auto logpdf = [](double x, BetaParams b) {
      return (b.alpha - 1.0) * std::log(x) + (b.beta - 1.0) * std::log1p(-x) - log_beta_function(b.alpha, b.beta);
    };
    const double quad = integrator.integrate(
        [&](double x) {
          const double lp = logpdf(x, p);
          const double e = std::exp(lp);
          return e == 0.0 ? 0.0 : e * (lp - logpdf(x, q));
        },
        0.0, 1.0, 1e-13);
    worst = std::max(worst, std::abs(kl_beta(p, q) - quad));
  }
  return at_most("kl_closed_form_vs_quadrature", worst, 1e-6);
}

inline CheckResult trimmed_support_check(std::uint64_t seed) {
  const auto g = BayesNetGraph::naive_bayes(4);
  const BetaTable post = make_priors(g, {0.3, 9.0}, {});
  const double omega = trim_level(2.0);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const ThetaTable draw = trimmed_posterior_sample(post, 2.0, derive_seed(seed, {s}));
    for (double t : draw.values()) worst = std::max({worst, omega - t, t - (1.0 - omega)});
  }
  return at_most("trimmed_sampler_outside_interval", worst, 0.0);
}

inline CheckResult conjugacy_check(std::uint64_t seed) {
  const auto t = synth_linreg(2, 30, seed);
  const auto data = ingest(t.x, t.y, 0.5);
  const double b = 1.5;
  const auto post = posterior(data, b, 2.0);
  auto log_prior_lik = [&](const Eigen::Vector2d& w) {
    return -0.5 * b * w.squaredNorm() - 0.5 / data.sigma2 * (data.y - data.x * w).squaredNorm();
  };
  const double offset = truncated_log_density(post, Eigen::Vector2d::Zero()) - log_prior_lik(Eigen::Vector2d::Zero());
  double worst = 0.0;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) {
      const Eigen::Vector2d w(0.15 * i, 0.15 * j);
      if (w.norm() <= post.radius)
        worst = std::max(worst, std::abs(std::expm1(truncated_log_density(post, w) - log_prior_lik(w) - offset)));
    }
  return at_most("regression_conjugacy", worst, 1e-6);
}

inline CheckResult nb_symmetry_check() {
  const auto g = BayesNetGraph::naive_bayes(8);
  const BetaTable post = make_priors(g, {1, 1}, {});
  double worst = 0.0;
  for (Record x = 0; x < 512; x += 2) worst = std::max(worst, std::abs(nb_predictive_closed_form(post, x) - 0.5));
  return at_most("nb_closed_form_symmetry", worst, 1e-15);
}

}  // namespace detail

inline std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
  const std::vector<std::function<CheckResult()>> checks = {
      [] { return detail::sensitivity_check(); },
      [&] { return detail::laplace_ratio_check(seed); },
      [&] { return detail::fourier_transform_check(seed); },
      [&] { return detail::fourier_reconstruction_check(seed); },
      [&] { return detail::fourier_consistency_check(seed); },
      [&] { return detail::softmax_check(seed); },
      [&] { return detail::kl_check(seed); },
      [&] { return detail::trimmed_support_check(seed); },
      [&] { return detail::conjugacy_check(seed); },
      [] { return detail::nb_symmetry_check(); },
  };
  std::vector<CheckResult> out;
  for (const auto& c : checks) out.push_back(c());
  return out;
}

inline nlohmann::json to_json(const std::vector<CheckResult>& results) {
  nlohmann::json j;
  j["checks"] = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    j["checks"].push_back({{"name", r.name}, {"pass", r.pass}, {"observed", r.observed}, {"limit", r.limit}});
    failed += r.pass ? 0 : 1;
  }
  j["passed"] = results.size() - failed;
  j["failed"] = failed;
  return j;
}

}  // namespace dpbayes::cli
