#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "apa/embedding.hpp"

namespace apa {

/// Mean and unbiased covariance of an embedding set.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t n = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Throws DataError for fewer than two rows.
GaussianStats gaussian_stats(const Eigen::MatrixXd& rows);
GaussianStats gaussian_stats(const EmbeddingMatrix& x);

/// Principal square root of a symmetric PSD matrix. Eigenvalues below zero
/// (numerical noise) are clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c);

/// The symmetrized square root of a covariance product,
/// sqrt(sqrt(a) * b * sqrt(a)), whose trace equals Tr((a b)^(1/2)).
Eigen::MatrixXd symmetric_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Fréchet distance between two Gaussians:
/// |mu_a - mu_b|^2 + Tr(Ca + Cb - 2 (Ca Cb)^(1/2)), clamped at zero.
/// Throws DataError on a dimension mismatch, MathDomainError if the matrix
/// square root fails even after regularization.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// A reference distribution with its covariance square root precomputed,
/// for repeated Fréchet distances against the same reference.
class FrechetReference {
 public:
  explicit FrechetReference(GaussianStats stats);

  const GaussianStats& stats() const { return stats_; }
  double distance_to(const GaussianStats& other) const;

 private:
  GaussianStats stats_;
  Eigen::MatrixXd sqrt_cov_;
  double trace_ = 0.0;
};

/// Polynomial kernel k(x, y) = (gamma <x, y> + coef0)^degree.
struct KernelParams {
  int degree = 3;
  double gamma = 1.0;
  double coef0 = 1.0;

  /// gamma = 1/d, coef0 = 1, degree 3.
  static KernelParams for_dim(std::size_t d);
  double operator()(double dot) const;
};

/// Squared MMD, biased (V-statistic) estimator:
/// mean(Kxx) + mean(Kyy) - 2 mean(Kxy), clamped at zero. Kernel sums are
/// accumulated in double in a fixed order. Default kernel: for_dim(cols).
double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelParams& kernel);
double mmd2(const EmbeddingMatrix& x, const EmbeddingMatrix& y);

/// Mean kernel value over all cross pairs of rows.
double mean_kernel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const KernelParams& kernel);

enum class Metric { Fad, Mmd };

std::string to_string(Metric m);
Metric parse_metric(std::string_view name);

/// M_reference(candidate): FAD or squared MMD. Finite and non-negative.
double distance(Metric metric, const EmbeddingMatrix& reference, const EmbeddingMatrix& candidate);
double distance(Metric metric, const Eigen::MatrixXd& reference, const Eigen::MatrixXd& candidate);

}  // namespace apa
