#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dpbayes/error.hpp"
#include "dpbayes/random.hpp"

namespace dpbayes {

/// Linear-Gaussian regression data; after ingestion every row has
/// ||x_i||_2 <= 1 and |y_i| <= 1.
struct RegressionData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  double sigma2 = 1.0;

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index dims() const noexcept { return x.cols(); }
};

/// Factors applied at ingestion; predictions in original units are
/// (x / x_scale) w * y_scale.
struct RegressionScaling {
  double x_scale = 1.0;
  double y_scale = 1.0;
};

/// Divides features by the largest row norm and targets by the largest
/// absolute target.
inline RegressionScaling fit_scaling(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  RegressionScaling s;
  const double max_row = x.rows() == 0 ? 0.0 : x.rowwise().norm().maxCoeff();
  const double max_y = y.size() == 0 ? 0.0 : y.cwiseAbs().maxCoeff();
  s.x_scale = max_row > 0.0 ? max_row : 1.0;
  s.y_scale = max_y > 0.0 ? max_y : 1.0;
  return s;
}

inline RegressionData apply_scaling(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const RegressionScaling& s, double sigma2) {
  require(x.rows() == y.size(), ErrorCode::LengthMismatch, "feature and target row counts differ");
  return {x / s.x_scale, y / s.y_scale, sigma2};
}

inline RegressionData ingest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double sigma2,
                             RegressionScaling* scaling_out = nullptr) {
  const RegressionScaling s = fit_scaling(x, y);
  if (scaling_out != nullptr) *scaling_out = s;
  return apply_scaling(x, y, s, sigma2);
}

/// N(mu, sigma) restricted to the ball ||w||_2 <= radius.
struct GaussianPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double radius = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd chol;  // lower Cholesky factor of sigma

  Eigen::Index dims() const noexcept { return mu.size(); }
};

/// Conjugate update: A = X^T X + sigma^2 Lambda,
/// mu = A^{-1} X^T y, Sigma = sigma^2 A^{-1}.
inline GaussianPosterior posterior(const RegressionData& data, const Eigen::MatrixXd& precision,
                                   double radius) {
  const Eigen::Index d = precision.rows();
  require(precision.cols() == d, ErrorCode::DimensionMismatch, "precision must be square");
  require(data.x.rows() == 0 || data.x.cols() == d, ErrorCode::DimensionMismatch,
          "precision dimension differs from feature count");
  require(data.sigma2 > 0.0, ErrorCode::InvalidArgument, "noise variance must be positive");
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");

  Eigen::MatrixXd a = data.sigma2 * precision;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  if (data.x.rows() > 0) {
    a.noalias() += data.x.transpose() * data.x;
    rhs.noalias() = data.x.transpose() * data.y;
  }
  a = 0.5 * (a + a.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  require(llt.info() == Eigen::Success, ErrorCode::SingularSystem,
          "X^T X + sigma^2 Lambda is not positive definite");

  GaussianPosterior out;
  out.mu = llt.solve(rhs);
  out.sigma = data.sigma2 * llt.solve(Eigen::MatrixXd::Identity(d, d));
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  out.radius = radius;
  Eigen::LLT<Eigen::MatrixXd> cov(out.sigma);
  require(cov.info() == Eigen::Success, ErrorCode::SingularSystem,
          "posterior covariance is not positive definite");
  out.chol = cov.matrixL();
  return out;
}

/// Spherical prior precision b I.
inline GaussianPosterior posterior(const RegressionData& data, double b, double radius) {
  require(b > 0.0, ErrorCode::InvalidArgument, "prior precision must be positive");
  const Eigen::Index d = data.x.cols();
  return posterior(data, b * Eigen::MatrixXd::Identity(d, d), radius);
}

/// Norm bound 10 / sqrt(b) on the weights.
inline double default_radius(double b) {
  require(b > 0.0, ErrorCode::InvalidArgument, "prior precision must be positive");
  return 10.0 / std::sqrt(b);
}

inline constexpr std::size_t kRegressionRejectionBudget = 100000;

/// Rejection sampling from N(mu, Sigma) until ||w||_2 <= radius.
inline Eigen::VectorXd sample_truncated(const GaussianPosterior& post, Rng& rng,
                                        std::size_t budget = kRegressionRejectionBudget) {
  require(post.radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(post.dims());
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    Eigen::VectorXd w = post.mu + post.chol * z;
    if (w.norm() <= post.radius) return w;
  }
  throw Error(ErrorCode::RejectionBudgetExhausted,
              "no draw inside the norm ball; the radius is likely misconfigured");
}

/// L(w) = n / (2 sigma^2) (1 + 2 ||w||_1 + d ||w||_2); the posterior sampler is
/// 2 L(w)-differentially private under rho(D, D') = sum ||(dx_i, dy_i)||_2.
inline double regression_sensitivity(const Eigen::VectorXd& w, std::size_t n, std::size_t d,
                                     double sigma2) {
  require(sigma2 > 0.0, ErrorCode::InvalidArgument, "noise variance must be positive");
  return static_cast<double>(n) / (2.0 * sigma2) *
         (1.0 + 2.0 * w.lpNorm<1>() + static_cast<double>(d) * w.norm());
}

/// The looser intermediate form n / (2 sigma^2) (1 + (d + 2) ||w||_1).
inline double regression_sensitivity_l1(const Eigen::VectorXd& w, std::size_t n, std::size_t d,
                                        double sigma2) {
  require(sigma2 > 0.0, ErrorCode::InvalidArgument, "noise variance must be positive");
  return static_cast<double>(n) / (2.0 * sigma2) *
         (1.0 + (static_cast<double>(d) + 2.0) * w.lpNorm<1>());
}

/// L evaluated at the worst point of the ball: ||w||_1 <= sqrt(d) R, ||w||_2 <= R.
inline double worst_case_sensitivity(double radius, std::size_t n, std::size_t d, double sigma2) {
  require(sigma2 > 0.0, ErrorCode::InvalidArgument, "noise variance must be positive");
  const double dd = static_cast<double>(d);
  return static_cast<double>(n) / (2.0 * sigma2) * (1.0 + 2.0 * std::sqrt(dd) * radius + dd * radius);
}

struct RegressionPrivacyReport {
  double lipschitz = 0.0;  // L at the radius
  double epsilon = 0.0;    // 2 L per unit of rho
};

inline RegressionPrivacyReport regression_privacy(double radius, std::size_t n, std::size_t d,
                                                  double sigma2) {
  const double l = worst_case_sensitivity(radius, n, d, sigma2);
  return {l, 2.0 * l};
}

inline double mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& y) {
  require(predicted.size() == y.size(), ErrorCode::LengthMismatch, "prediction length mismatch");
  if (y.size() == 0) return 0.0;
  return (predicted - y).squaredNorm() / static_cast<double>(y.size());
}

/// MSE of X w_bar where w_bar averages `samples` truncated-posterior draws.
inline double predictive_mse(const GaussianPosterior& post, const Eigen::MatrixXd& x_test,
                             const Eigen::VectorXd& y_test, std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, ErrorCode::InvalidArgument, "samples must be at least 1");
  Rng rng = substream(seed, {});
  Eigen::VectorXd w_bar = Eigen::VectorXd::Zero(post.dims());
  for (std::size_t s = 0; s < samples; ++s) w_bar += sample_truncated(post, rng);
  w_bar /= static_cast<double>(samples);
  return mse(x_test * w_bar, y_test);
}

/// Log of the unnormalized truncated posterior: log N(w | mu, Sigma) on the
/// ball, -inf outside.
inline double truncated_log_density(const GaussianPosterior& post, const Eigen::VectorXd& w) {
  if (w.norm() > post.radius) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd diff = w - post.mu;
  const Eigen::VectorXd solved = post.chol.triangularView<Eigen::Lower>().solve(diff);
  const double logdet = 2.0 * post.chol.diagonal().array().log().sum();
  const double d = static_cast<double>(post.dims());
  return -0.5 * solved.squaredNorm() - 0.5 * logdet - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

}  // namespace dpbayes
