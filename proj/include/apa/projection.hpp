#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "apa/embedding.hpp"

namespace apa {

/// Requested projection: identity (`np`) or whitening PCA with k components
/// (`pca10`, `pca100`, or any `pca<k>`).
struct ProjectionSpec {
  std::size_t components = 0;  // 0 means identity

  bool is_identity() const { return components == 0; }
  std::string label() const;

  static ProjectionSpec parse(std::string_view label);
};

/// A fitted whitening-PCA transform, or the identity.
///
/// For PCA, transform(x) = diag(scale) * basis * (x - mean), where basis
/// has orthonormal rows (the leading right singular vectors of the centred
/// fit data) and scale_i = sqrt(N - 1) / singular_value_i, so the fit data
/// maps to zero mean and unit variance per component.
class Projection {
 public:
  static Projection identity(std::size_t dim);

  bool is_identity() const { return identity_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return identity_ ? input_dim_ : static_cast<std::size_t>(basis_.rows()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& scale() const { return scale_; }
  double explained_variance_ratio() const { return explained_variance_ratio_; }
  std::string label() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;

  /// Sidecar file: an AEMB container with backend id `projection-v1`.
  /// Rows: mean, k basis rows, scale (first k columns), then a metadata
  /// row [explained variance ratio, identity flag].
  void save(const std::filesystem::path& path) const;
  static Projection load(const std::filesystem::path& path);

 private:
  friend Projection fit_projection(const EmbeddingMatrix& x, std::size_t k);
  friend Projection projection_from_sidecar(const EmbeddingMatrix& m);

  bool identity_ = true;
  std::size_t input_dim_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;  // k x D
  Eigen::VectorXd scale_;  // k
  double explained_variance_ratio_ = 1.0;
};

/// Fits a k-component whitening PCA on the rows of x.
/// Throws ConfigError when k is zero or exceeds min(rows - 1, cols), and
/// MathDomainError on zero-variance input or when k exceeds the effective
/// rank (singular values below 1e-10 of the largest).
Projection fit_projection(const EmbeddingMatrix& x, std::size_t k);

/// Identity for an identity spec, otherwise a PCA fit.
Projection fit_projection(const EmbeddingMatrix& x, const ProjectionSpec& spec);

/// Throws DataError on a column-count mismatch. Identity returns the input
/// unchanged (same values, same backend id).
EmbeddingMatrix apply_projection(const Projection& p, const EmbeddingMatrix& x);

Projection projection_from_sidecar(const EmbeddingMatrix& m);

}  // namespace apa
