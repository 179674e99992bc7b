#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/map.hpp"

namespace dpbayes {

/// Shortest decimal text that round-trips the double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorCode::ParseError,
          "line " + std::to_string(line_no) + ": not a number: '" + std::string(text) + "'");
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open " + path);
  return in;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

/// Headerless CSV of 0/1 values; column c is node c.
inline Dataset read_dataset_csv(std::istream& in, std::size_t expected_dimension = 0) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<Dataset> data;
  if (expected_dimension != 0) data.emplace(expected_dimension);
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (!data) data.emplace(fields.size());
    require(fields.size() == data->dimension(), ErrorCode::DimensionMismatch,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(data->dimension()) +
                " columns, got " + std::to_string(fields.size()));
    Record x = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      require(fields[c] == "0" || fields[c] == "1", ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": values must be 0 or 1");
      if (fields[c] == "1") x |= singleton(c);
    }
    data->add(x);
  }
  require(data.has_value(), ErrorCode::ParseError, "dataset is empty and has no declared dimension");
  return std::move(*data);
}

inline Dataset read_dataset_csv(const std::string& path, std::size_t expected_dimension = 0) {
  auto in = open_input(path);
  return read_dataset_csv(in, expected_dimension);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Record x : data.records()) {
    for (std::size_t c = 0; c < data.dimension(); ++c) out << (c ? "," : "") << (bit(x, c) ? '1' : '0');
    out << '\n';
  }
}

struct NetworkSpec {
  BayesNetGraph graph;
  BetaTable priors;
};

inline BetaParams parse_beta_pair(const nlohmann::json& j) {
  require(j.is_array() && j.size() == 2, ErrorCode::ParseError, "Beta prior must be [alpha, beta]");
  return {j[0].get<double>(), j[1].get<double>()};
}

/// {"nodes": N, "parents": [[...], ...],
///  "priors": {"default": [a, b], "overrides": [{"node": i, "config": j, "alpha": a, "beta": b}]}}
inline NetworkSpec parse_network(const nlohmann::json& j) {
  try {
    const auto nodes = j.at("nodes").get<std::size_t>();
    std::vector<std::vector<std::size_t>> parents(nodes);
    if (j.contains("parents")) {
      const auto& p = j.at("parents");
      require(p.is_array() && p.size() == nodes, ErrorCode::ParseError,
              "'parents' must list one array per node");
      for (std::size_t i = 0; i < nodes; ++i) parents[i] = p[i].get<std::vector<std::size_t>>();
    }
    BayesNetGraph graph(nodes, std::move(parents));
    BetaParams fallback{1.0, 1.0};
    std::vector<PriorOverride> overrides;
    if (j.contains("priors")) {
      const auto& pr = j.at("priors");
      if (pr.contains("default")) fallback = parse_beta_pair(pr.at("default"));
      if (pr.contains("overrides")) {
        for (const auto& o : pr.at("overrides")) {
          if (o.is_array()) {
            require(o.size() == 4, ErrorCode::ParseError, "override arrays are [node, config, alpha, beta]");
            overrides.push_back({{o[0].get<std::size_t>(), o[1].get<std::size_t>()},
                                 {o[2].get<double>(), o[3].get<double>()}});
          } else {
            overrides.push_back({{o.at("node").get<std::size_t>(), o.at("config").get<std::size_t>()},
                                 {o.at("alpha").get<double>(), o.at("beta").get<double>()}});
          }
        }
      }
    }
    BetaTable priors = make_priors(graph, fallback, overrides);
    return {std::move(graph), std::move(priors)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("network spec: ") + e.what());
  }
}

inline NetworkSpec read_network_json(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return parse_network(j);
}

/// Rows of reals, all the same width. Lines whose first field is not numeric
/// are accepted only as a leading header.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (rows.empty() && line_no == 1) {
      double probe = 0.0;
      const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), probe);
      if (res.ec != std::errc()) continue;  // header
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, line_no));
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::DimensionMismatch,
            "line " + std::to_string(line_no) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Grid file: each row is theta components followed by the prior mass.
/// Masses are renormalized to sum to 1.
inline GridSpec read_grid_csv(std::istream& in) {
  auto rows = read_numeric_csv(in);
  require(!rows.empty(), ErrorCode::ParseError, "grid file is empty");
  require(rows.front().size() >= 2, ErrorCode::ParseError, "grid rows need components and a mass");
  std::vector<std::vector<double>> points;
  std::vector<double> masses;
  for (auto& r : rows) {
    masses.push_back(r.back());
    r.pop_back();
    points.push_back(std::move(r));
  }
  return GridSpec::normalized(std::move(points), std::move(masses));
}

inline GridSpec read_grid_csv(const std::string& path) {
  auto in = open_input(path);
  return read_grid_csv(in);
}

struct RegressionTable {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

/// Numeric CSV whose last column is the target.
inline RegressionTable read_regression_csv(std::istream& in) {
  const auto rows = read_numeric_csv(in);
  require(!rows.empty(), ErrorCode::ParseError, "regression file is empty");
  const std::size_t cols = rows.front().size();
  require(cols >= 2, ErrorCode::ParseError, "need at least one feature and a target");
  RegressionTable t{Eigen::MatrixXd(rows.size(), cols - 1), Eigen::VectorXd(rows.size())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) t.x(r, c) = rows[r][c];
    t.y[r] = rows[r].back();
  }
  return t;
}

inline RegressionTable read_regression_csv(const std::string& path) {
  auto in = open_input(path);
  return read_regression_csv(in);
}

}  // namespace dpbayes
