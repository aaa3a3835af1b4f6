#include "apa/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "apa/error.hpp"

namespace apa {
namespace {

constexpr double kNegativeEigenTolerance = 1e-8;
constexpr double kRegularization = 1e-10;

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DataError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
  }
}

Eigen::MatrixXd regularized(const Eigen::MatrixXd& c) {
  const double d = static_cast<double>(c.rows());
  const double eps = std::max(kRegularization * c.trace() / d, kRegularization);
  return c + eps * Eigen::MatrixXd::Identity(c.rows(), c.cols());
}

/// Eigen-decomposes a symmetric matrix, regularizing once if the solver
/// fails or reports eigenvalues meaningfully below zero.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& c, bool vectors) {
  const int options = vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, options);
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (es.info() == Eigen::Success &&
      es.eigenvalues().minCoeff() >= -kNegativeEigenTolerance * scale) {
    return es;
  }
  es.compute(regularized(c), options);
  if (es.info() != Eigen::Success) {
    throw MathDomainError("matrix square root failed: eigendecomposition did not converge");
  }
  return es;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double trace_sqrt(const Eigen::MatrixXd& m) {
  const auto es = psd_eigen(symmetrize(m), false);
  double acc = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    acc += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  }
  return acc;
}

}  // namespace

GaussianStats gaussian_stats(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw DataError("gaussian_stats: need at least 2 rows");
  GaussianStats s;
  s.n = static_cast<std::size_t>(rows.rows());
  s.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = rows.rowwise() - s.mean.transpose();
  s.covariance = symmetrize(centred.transpose() * centred) / static_cast<double>(rows.rows() - 1);
  return s;
}

GaussianStats gaussian_stats(const EmbeddingMatrix& x) {
  validate(x);
  return gaussian_stats(x.to_double());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c) {
  const auto es = psd_eigen(symmetrize(c), true);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrize(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose());
}

Eigen::MatrixXd symmetric_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_dim(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()),
                   "symmetric_sqrt_product");
  const Eigen::MatrixXd ra = psd_sqrt(a);
  return psd_sqrt(symmetrize(ra * b * ra));
}

FrechetReference::FrechetReference(GaussianStats stats)
    : stats_(std::move(stats)), sqrt_cov_(psd_sqrt(stats_.covariance)),
      trace_(stats_.covariance.trace()) {}

double FrechetReference::distance_to(const GaussianStats& other) const {
  require_same_dim(stats_.dim(), other.dim(), "frechet_distance");
  if (stats_.mean == other.mean && stats_.covariance == other.covariance) return 0.0;
  const double mean_term = (stats_.mean - other.mean).squaredNorm();
  const double cross = trace_sqrt(sqrt_cov_ * other.covariance * sqrt_cov_);
  const double d = mean_term + trace_ + other.covariance.trace() - 2.0 * cross;
  if (!std::isfinite(d)) throw MathDomainError("frechet_distance: non-finite result");
  return std::max(0.0, d);
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  require_same_dim(a.dim(), b.dim(), "frechet_distance");
  return FrechetReference(a).distance_to(b);
}

KernelParams KernelParams::for_dim(std::size_t d) {
  if (d == 0) throw DataError("kernel dimensionality must be positive");
  return KernelParams{3, 1.0 / static_cast<double>(d), 1.0};
}

double KernelParams::operator()(double dot) const {
  const double base = gamma * dot + coef0;
  double r = 1.0;
  for (int i = 0; i < degree; ++i) r *= base;
  return r;
}

double mean_kernel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelParams& kernel) {
  const Eigen::MatrixXd gram = x * y.transpose();
  double total = 0.0;
  for (long i = 0; i < gram.rows(); ++i) {
    double row = 0.0;
    for (long j = 0; j < gram.cols(); ++j) row += kernel(gram(i, j));
    total += row;
  }
  return total / (static_cast<double>(gram.rows()) * static_cast<double>(gram.cols()));
}

double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelParams& kernel) {
  require_same_dim(static_cast<std::size_t>(x.cols()), static_cast<std::size_t>(y.cols()), "mmd2");
  if (x.rows() < 1 || y.rows() < 1) throw DataError("mmd2: empty sample");
  const double kxx = mean_kernel(x, x, kernel);
  const double kyy = mean_kernel(y, y, kernel);
  const double kxy = mean_kernel(x, y, kernel);
  const double d = kxx + kyy - 2.0 * kxy;
  if (!std::isfinite(d)) throw MathDomainError("mmd2: non-finite result");
  return std::max(0.0, d);
}

double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return mmd2(x, y, KernelParams::for_dim(static_cast<std::size_t>(x.cols())));
}

double mmd2(const EmbeddingMatrix& x, const EmbeddingMatrix& y) {
  validate(x);
  validate(y);
  return mmd2(x.to_double(), y.to_double());
}

std::string to_string(Metric m) { return m == Metric::Fad ? "fad" : "mmd"; }

Metric parse_metric(std::string_view name) {
  if (name == "fad" || name == "FAD") return Metric::Fad;
  if (name == "mmd" || name == "MMD") return Metric::Mmd;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected fad or mmd)");
}

double distance(Metric metric, const Eigen::MatrixXd& reference, const Eigen::MatrixXd& candidate) {
  require_same_dim(static_cast<std::size_t>(reference.cols()),
                   static_cast<std::size_t>(candidate.cols()), "distance");
  if (metric == Metric::Fad) {
    return frechet_distance(gaussian_stats(reference), gaussian_stats(candidate));
  }
  return mmd2(reference, candidate);
}

double distance(Metric metric, const EmbeddingMatrix& reference, const EmbeddingMatrix& candidate) {
  validate(reference);
  validate(candidate);
  return distance(metric, reference.to_double(), candidate.to_double());
}

}  // namespace apa
