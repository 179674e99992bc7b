// dpbayes command line.
//
//   dpbayes [task] [key=value ...] [--config file.json] [flags]
//
// task is one of nb, linreg, mechanism, verify, synth. A mechanism= key
// implies task=mechanism. Settings are merged in order: task defaults,
// --config, key=value tokens, flags.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpbayes/dpbayes.hpp"
#include "verify_suite.hpp"

using namespace dpbayes;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    double d = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return d;
  }
  throw ConfigError("setting '" + key + "' is not a number");
}

std::uint64_t to_u64(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::uint64_t u = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), u);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return u;
  }
  throw ConfigError("setting '" + key + "' is not a non-negative integer");
}

std::string to_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::vector<double> to_doubles(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(to_double(e, key));
  } else if (v.is_number()) {
    out.push_back(v.get<double>());
  } else {
    for (const auto& s : split_list(to_string(v))) out.push_back(to_double(s, key));
  }
  return out;
}

std::vector<std::string> to_strings(const json& v) {
  if (v.is_array()) return v.get<std::vector<std::string>>();
  return split_list(to_string(v));
}

class Settings {
 public:
  void merge(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items()) values_[normalize(k)] = v;
  }
  void set(const std::string& key, json value) { values_[normalize(key)] = std::move(value); }

  bool has(const std::string& key) const { return values_.contains(key); }
  const json& at(const std::string& key) const { return values_.at(key); }

  double real(const std::string& key, double fallback) const {
    return has(key) ? to_double(at(key), key) : fallback;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? to_u64(at(key), key) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback = "") const {
    return has(key) ? to_string(at(key)) : fallback;
  }

  void reject_unknown(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : values_.items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError("unknown setting '" + k + "'");
  }

 private:
  static std::string normalize(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
  }
  json values_ = json::object();
};

const std::vector<std::string> kCommonKeys = {"task", "seed", "out", "config"};

std::ostream& output(const Settings& s, std::ofstream& file) {
  const std::string path = s.text("out");
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  return file;
}

ExperimentConfig experiment_config(const Settings& s, const std::string& task) {
  std::vector<std::string> known = kCommonKeys;
  known.insert(known.end(), {"mechanisms", "repeats", "train_frac", "train_fraction", "data", "records",
                             "samples"});
  auto c = ExperimentConfig::defaults_for(task);
  if (task == "nb") {
    known.insert(known.end(), {"epsilon", "epsilon_grid", "features", "t", "prior", "max_attempts"});
    if (s.has("epsilon_grid")) c.grid = to_doubles(s.at("epsilon_grid"), "epsilon_grid");
    if (s.has("epsilon")) c.grid = to_doubles(s.at("epsilon"), "epsilon");
    c.features = s.integer("features", c.features);
    c.fourier_t = s.real("t", c.fourier_t);
    c.mc_samples = s.integer("samples", c.mc_samples);
    c.fourier_max_attempts = s.integer("max_attempts", c.fourier_max_attempts);
    if (s.has("prior")) {
      const auto p = to_doubles(s.at("prior"), "prior");
      if (p.size() != 2) throw ConfigError("prior must be alpha,beta");
      c.prior = {p[0], p[1]};
    }
  } else {
    known.insert(known.end(), {"b", "b_grid", "dims", "sigma2", "noise_sd", "radius"});
    if (s.has("b_grid")) c.grid = to_doubles(s.at("b_grid"), "b_grid");
    if (s.has("b")) c.grid = to_doubles(s.at("b"), "b");
    c.dims = s.integer("dims", c.dims);
    c.sigma2 = s.real("sigma2", c.sigma2);
    c.noise_sd = s.real("noise_sd", c.noise_sd);
    c.regression_samples = s.integer("samples", c.regression_samples);
    if (s.has("radius") && s.text("radius") != "auto") c.radius = s.real("radius", 0.0);
  }
  s.reject_unknown(known);
  if (s.has("mechanisms")) c.mechanisms = to_strings(s.at("mechanisms"));
  c.repeats = s.integer("repeats", c.repeats);
  c.train_fraction = s.real("train_fraction", s.real("train_frac", c.train_fraction));
  c.seed = s.integer("seed", c.seed);
  c.records = s.integer("records", c.records);
  c.out = s.text("out");
  c.data_path = s.text("data");
  c.validate();
  return c;
}

int run_experiment(const Settings& s, const std::string& task) {
  const auto c = experiment_config(s, task);
  ExperimentResult r;
  if (task == "nb") {
    std::optional<Dataset> data;
    if (!c.data_path.empty()) data = read_dataset_csv(c.data_path);
    r = run_nb_experiment(c, std::move(data));
    std::cerr << "fourier stealth reruns: " << r.stealth_reruns << ", clamped releases: " << r.stealth_clamped
              << '\n';
  } else {
    std::optional<RegressionTable> data;
    if (!c.data_path.empty()) data = read_regression_csv(c.data_path);
    r = run_linreg_experiment(c, std::move(data));
  }
  std::ofstream file;
  write_metrics_csv(output(s, file), r.rows);
  return 0;
}

struct MechanismInput {
  NetworkSpec network;
  Dataset data;
};

MechanismInput mechanism_input(const Settings& s, std::uint64_t seed) {
  if (s.has("network")) {
    if (!s.has("data")) throw ConfigError("network= needs a data= file");
    auto net = read_network_json(s.text("network"));
    auto data = read_dataset_csv(s.text("data"), net.graph.node_count());
    return {std::move(net), std::move(data)};
  }
  Dataset data = s.has("data") ? read_dataset_csv(s.text("data"))
                               : synth_nb(s.integer("features", 16), s.integer("records", 50),
                                          derive_seed(seed, {0})).data;
  if (data.dimension() < 2) throw ConfigError("data needs a class column and at least one feature");
  auto graph = BayesNetGraph::naive_bayes(data.dimension() - 1);
  auto priors = make_priors(graph, {1.0, 1.0}, {});
  return {{std::move(graph), std::move(priors)}, std::move(data)};
}

void write_params(std::ostream& out, const BetaTable& params) {
  out << "node,config,alpha,beta\n";
  for (std::size_t k = 0; k < params.size(); ++k) {
    const EntryKey e = params.layout().key(k);
    out << e.node << ',' << e.config << ',' << format_double(params[k].alpha) << ','
        << format_double(params[k].beta) << '\n';
  }
}

int run_laplace(const Settings& s, std::ostream& out) {
  const double eps = s.real("epsilon", 1.0);
  const auto seed = s.integer("seed", 1);
  const auto in = mechanism_input(s, seed);
  const auto spec = LaplaceNoiseSpec::for_graph(in.network.graph, eps, in.data.size());
  const auto z = perturb_updates(compute_updates(in.network.graph, in.data), spec, seed);
  out << "node,config,z1,z2\n";
  for (std::size_t k = 0; k < z.size(); ++k) {
    const EntryKey e = z.layout().key(k);
    out << e.node << ',' << e.config << ',' << format_double(z[k].alpha) << ',' << format_double(z[k].beta)
        << '\n';
  }
  return 0;
}

int run_fourier(const Settings& s, std::ostream& out) {
  const double eps = s.real("epsilon", 1.0);
  const double t = s.real("t", std::numbers::ln10);
  const auto seed = s.integer("seed", 1);
  const auto in = mechanism_input(s, seed);
  const auto rel = release_fourier_posterior(in.data, in.network.graph, in.network.priors, eps, t, seed,
                                             s.integer("max_attempts", 100));
  if (rel.attempts > 1) std::cerr << "fourier stealth reruns: " << rel.attempts - 1 << '\n';
  if (rel.clamped) std::cerr << "fourier release clamped after " << rel.attempts << " attempts\n";
  out << "gamma,value\n";
  for (std::size_t k = 0; k < rel.coefficients.indices.size(); ++k) {
    std::ostringstream hex;
    hex << "0x" << std::hex << rel.coefficients.indices[k];
    out << hex.str() << ',' << format_double(rel.coefficients.values[k]) << '\n';
  }
  out << '\n';
  write_params(out, rel.params);
  return 0;
}

int run_sampler(const Settings& s, std::ostream& out) {
  const double eps = s.real("epsilon", 2.0);
  const auto samples = s.integer("samples", 1);
  const auto seed = s.integer("seed", 1);
  const auto in = mechanism_input(s, seed);
  const auto post = posterior_params(in.network.priors, compute_updates(in.network.graph, in.data));
  const auto draws = trimmed_posterior_draws(post, eps, samples, seed);
  out << "sample,node,config,theta\n";
  for (std::size_t d = 0; d < draws.size(); ++d)
    for (std::size_t k = 0; k < draws[d].size(); ++k) {
      const EntryKey e = draws[d].layout().key(k);
      out << d << ',' << e.node << ',' << e.config << ',' << format_double(draws[d][k]) << '\n';
    }
  return 0;
}

// Grid points list one theta per entry of the network in flat entry order.
int run_map(const Settings& s, std::ostream& out) {
  if (!s.has("grid")) throw ConfigError("mechanism=map needs grid=<file>");
  const double eps = s.real("epsilon", 1.0);
  const auto seed = s.integer("seed", 1);
  const auto grid = read_grid_csv(s.text("grid"));
  const auto in = mechanism_input(s, seed);
  const EntryLayout layout(in.network.graph);
  std::vector<double> utility;
  double lipschitz = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& point = grid.points[p];
    require(point.size() == layout.size(), ErrorCode::DimensionMismatch,
            "grid points need " + std::to_string(layout.size()) + " components");
    for (double v : point)
      require(v > 0.0 && v < 1.0, ErrorCode::InvalidArgument, "grid components must lie in (0, 1)");
    const ThetaTable theta(layout, point);
    double u = std::log(grid.prior_mass[p]);
    for (Record x : in.data.records()) u += log_likelihood(in.network.graph, theta, x);
    utility.push_back(u);
    lipschitz = std::max(lipschitz, record_lipschitz(in.network.graph, theta));
  }
  const auto delta = map_sensitivity(SensitivityKind::Lipschitz, s.real("lipschitz", lipschitz), s.real("r", 1.0));
  const auto chosen = exp_mechanism_sample(grid, utility, eps, delta, seed);
  out << "index,delta,utility";
  for (std::size_t k = 0; k < layout.size(); ++k) out << ",theta" << k;
  out << '\n' << chosen << ',' << format_double(delta.delta_value) << ',' << format_double(utility[chosen]);
  for (double v : grid.points[chosen]) out << ',' << format_double(v);
  out << '\n';
  if (s.has("certificate_t")) {
    const double t = s.real("certificate_t", 1.0);
    std::cerr << "level-set bound at t=" << t << ": " << lemma6_certificate(grid, utility, eps, t, delta) << '\n';
  }
  return 0;
}

int run_mechanism(const Settings& s) {
  std::vector<std::string> known = kCommonKeys;
  known.insert(known.end(), {"mechanism", "epsilon", "network", "data", "features", "records", "t",
                             "max_attempts", "samples", "grid", "lipschitz", "r", "certificate_t"});
  s.reject_unknown(known);
  const std::string m = s.text("mechanism");
  std::ofstream file;
  std::ostream& out = output(s, file);
  if (m == "laplace") return run_laplace(s, out);
  if (m == "fourier") return run_fourier(s, out);
  if (m == "sampler") return run_sampler(s, out);
  if (m == "map") return run_map(s, out);
  throw ConfigError("mechanism must be laplace, fourier, sampler or map");
}

int run_verify(const Settings& s) {
  s.reject_unknown(kCommonKeys);
  const auto results = cli::run_verify_suite(s.integer("seed", 1));
  const auto report = cli::to_json(results);
  std::ofstream file;
  output(s, file) << report.dump(2) << '\n';
  return report["failed"].get<std::size_t>() == 0 ? 0 : kExitVerify;
}

int run_synth(const Settings& s) {
  std::vector<std::string> known = kCommonKeys;
  known.insert(known.end(), {"kind", "features", "records", "dims", "noise_sd"});
  s.reject_unknown(known);
  const auto seed = s.integer("seed", 1);
  const std::string kind = s.text("kind", "nb");
  std::ofstream file;
  std::ostream& out = output(s, file);
  if (kind == "nb") {
    write_dataset_csv(out, synth_nb(s.integer("features", 16), s.integer("records", 1000), seed).data);
  } else if (kind == "linreg") {
    const auto t = synth_linreg(s.integer("dims", 5), s.integer("records", 2000), seed, s.real("noise_sd", 1.0));
    for (Eigen::Index i = 0; i < t.x.rows(); ++i) {
      for (Eigen::Index k = 0; k < t.x.cols(); ++k) out << format_double(t.x(i, k)) << ',';
      out << format_double(t.y[i]) << '\n';
    }
  } else {
    throw ConfigError("kind must be nb or linreg");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private Bayesian inference mechanisms and experiments", "dpbayes"};
  std::vector<std::string> tokens;
  std::string config_path;
  std::optional<std::string> task, mechanisms, eps_grid, b_grid, out;
  std::optional<std::uint64_t> repeats, seed;
  std::optional<double> train_frac;
  app.add_option("settings", tokens, "task name and key=value settings");
  app.add_option("--config", config_path, "JSON settings file")->check(CLI::ExistingFile);
  app.add_option("--task", task, "nb | linreg | mechanism | verify | synth");
  app.add_option("--mechanisms", mechanisms, "comma-separated mechanism list");
  app.add_option("--epsilon-grid", eps_grid, "comma-separated epsilon values");
  app.add_option("--b-grid", b_grid, "comma-separated prior precisions");
  app.add_option("--repeats", repeats);
  app.add_option("--seed", seed);
  app.add_option("--train-frac", train_frac);
  app.add_option("--out", out, "output path, - for stdout");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Settings s;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        s.merge(json::parse(in));
      } catch (const json::exception& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
    }
    for (const auto& tok : tokens) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) {
        s.set("task", tok);
      } else {
        if (eq == 0) throw ConfigError("malformed setting '" + tok + "'");
        s.set(tok.substr(0, eq), tok.substr(eq + 1));
      }
    }
    if (task) s.set("task", *task);
    if (mechanisms) s.set("mechanisms", *mechanisms);
    if (eps_grid) s.set("epsilon_grid", *eps_grid);
    if (b_grid) s.set("b_grid", *b_grid);
    if (repeats) s.set("repeats", *repeats);
    if (seed) s.set("seed", *seed);
    if (train_frac) s.set("train_fraction", *train_frac);
    if (out) s.set("out", *out);
    s.set("config", config_path);

    const std::string t = s.text("task", s.has("mechanism") ? "mechanism" : "nb");
    if (t == "nb" || t == "linreg") return run_experiment(s, t);
    if (t == "mechanism") return run_mechanism(s);
    if (t == "verify") return run_verify(s);
    if (t == "synth") return run_synth(s);
    throw ConfigError("unknown task '" + t + "'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
