// Releases the posterior of a small Beta-Bernoulli network with each private
// mechanism and reports how far each release lands from the exact posterior.
//
//   network_demo [network.json] [records] [epsilon] [seed]

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "dpbayes/dpbayes.hpp"

using namespace dpbayes;

namespace {

Dataset ancestral_sample(const BayesNetGraph& g, const ThetaTable& theta, std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, {});
  Dataset d(g.node_count());
  for (std::size_t r = 0; r < n; ++r) {
    Record x = 0;
    for (std::size_t i : g.topological_order())
      if (uniform01(rng) < theta(i, g.parent_config(i, x))) x |= singleton(i);
    d.add(x);
  }
  return d;
}

double mean_abs_error(const ThetaTable& truth, const BetaTable& post) {
  double s = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) s += std::abs(post[k].mean() - truth[k]);
  return s / static_cast<double>(truth.size());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : DPBAYES_DEMO_NETWORK;
  const std::size_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 500;
  const double eps = argc > 3 ? std::strtod(argv[3], nullptr) : 2.0;
  const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 7;

  try {
    const NetworkSpec net = read_network_json(path);
    const auto& g = net.graph;

    ThetaTable truth(g);
    Rng rng = substream(seed, {1});
    for (double& t : truth.values()) t = 0.1 + 0.8 * uniform01(rng);
    const Dataset data = ancestral_sample(g, truth, n, seed);

    const UpdateVector updates = compute_updates(g, data);
    const BetaTable exact = posterior_params(net.priors, updates);

    const auto laplace =
        posterior_params(net.priors, perturb_updates(updates, LaplaceNoiseSpec::for_graph(g, eps, n), seed));
    const auto fourier = release_fourier_posterior(data, g, net.priors, eps, std::numbers::ln10, seed);
    const ThetaTable draw = trimmed_posterior_sample(exact, eps, seed);

    std::cout << std::fixed << std::setprecision(4);
    std::cout << g.node_count() << " nodes, " << truth.size() << " entries, n = " << n << ", eps = " << eps << "\n\n";
    std::cout << "mechanism   KL(exact || release)   mean |E[theta] - truth|\n";
    std::cout << "none        " << std::setw(10) << 0.0 << "             " << mean_abs_error(truth, exact) << '\n';
    std::cout << "laplace     " << std::setw(10) << kl_report(exact, laplace).total << "             "
              << mean_abs_error(truth, laplace) << '\n';
    std::cout << "fourier     " << std::setw(10) << kl_report(exact, fourier.params).total << "             "
              << mean_abs_error(truth, fourier.params) << "   (" << fourier.attempts << " attempt"
              << (fourier.attempts == 1 ? "" : "s") << (fourier.clamped ? ", clamped" : "") << ")\n";

    double err = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) err += std::abs(draw[k] - truth[k]);
    std::cout << "sampler     " << std::setw(10) << "-" << "             " << err / static_cast<double>(truth.size())
              << "   (one trimmed draw, omega = " << trim_level(eps) << ")\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
