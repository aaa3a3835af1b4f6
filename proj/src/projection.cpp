#include "apa/projection.hpp"

#include <charconv>

#include <Eigen/SVD>

#include "apa/aemb.hpp"
#include "apa/error.hpp"

namespace apa {

namespace {
constexpr double kRankTolerance = 1e-10;
constexpr const char* kSidecarId = "projection-v1";
}  // namespace

std::string ProjectionSpec::label() const {
  return is_identity() ? "np" : "pca" + std::to_string(components);
}

ProjectionSpec ProjectionSpec::parse(std::string_view label) {
  if (label == "np" || label == "none" || label == "NP") return {};
  std::string_view digits;
  if (label.starts_with("pca")) digits = label.substr(3);
  if (label.starts_with("PCA")) digits = label.substr(3);
  std::size_t k = 0;
  const auto* end = digits.data() + digits.size();
  if (digits.empty() || std::from_chars(digits.data(), end, k).ptr != end || k == 0) {
    throw ConfigError("unknown projection '" + std::string(label) +
                      "' (expected np, pca10, pca100 or pca<k>)");
  }
  return ProjectionSpec{k};
}

Projection Projection::identity(std::size_t dim) {
  Projection p;
  p.identity_ = true;
  p.input_dim_ = dim;
  p.mean_ = Eigen::VectorXd::Zero(static_cast<long>(dim));
  p.explained_variance_ratio_ = 1.0;
  return p;
}

std::string Projection::label() const {
  return identity_ ? "np" : "pca" + std::to_string(basis_.rows());
}

Eigen::VectorXd Projection::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim_) {
    throw DataError("projection expects dimension " + std::to_string(input_dim_) + ", got " +
                    std::to_string(x.size()));
  }
  if (identity_) return x;
  return scale_.cwiseProduct(basis_ * (x - mean_));
}

Eigen::MatrixXd Projection::apply(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != input_dim_) {
    throw DataError("projection expects dimension " + std::to_string(input_dim_) + ", got " +
                    std::to_string(rows.cols()));
  }
  if (identity_) return rows;
  Eigen::MatrixXd centred = rows.rowwise() - mean_.transpose();
  return (centred * basis_.transpose()) * scale_.asDiagonal();
}

Projection fit_projection(const EmbeddingMatrix& x, std::size_t k) {
  validate(x);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (k == 0 || n < 2 || k > std::min(n - 1, d)) {
    throw ConfigError("cannot fit " + std::to_string(k) + " PCA components on " +
                      std::to_string(n) + "x" + std::to_string(d) +
                      " data (need 1 <= k <= min(rows - 1, cols))");
  }

  const Eigen::MatrixXd data = x.to_double();
  Projection p;
  p.identity_ = false;
  p.input_dim_ = d;
  p.mean_ = data.colwise().mean().transpose();
  const Eigen::MatrixXd centred = data.rowwise() - p.mean_.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) {
    throw MathDomainError("cannot fit PCA: input has zero variance (all rows identical)");
  }
  const auto kk = static_cast<long>(k);
  if (sv(kk - 1) < kRankTolerance * sv(0)) {
    throw MathDomainError("cannot fit " + std::to_string(k) +
                          " PCA components: data has lower effective rank");
  }

  p.basis_ = svd.matrixV().leftCols(kk).transpose();
  // Fix the sign of each component so fits are reproducible.
  for (long i = 0; i < kk; ++i) {
    Eigen::Index arg;
    p.basis_.row(i).cwiseAbs().maxCoeff(&arg);
    if (p.basis_(i, arg) < 0.0) p.basis_.row(i) *= -1.0;
  }
  const double root_dof = std::sqrt(static_cast<double>(n - 1));
  p.scale_ = sv.head(kk).cwiseInverse() * root_dof;

  const double total = sv.squaredNorm();
  p.explained_variance_ratio_ = sv.head(kk).squaredNorm() / total;
  return p;
}

Projection fit_projection(const EmbeddingMatrix& x, const ProjectionSpec& spec) {
  if (spec.is_identity()) return Projection::identity(x.cols());
  return fit_projection(x, spec.components);
}

EmbeddingMatrix apply_projection(const Projection& p, const EmbeddingMatrix& x) {
  if (x.cols() != p.input_dim()) {
    throw DataError("projection expects dimension " + std::to_string(p.input_dim()) + ", got " +
                    std::to_string(x.cols()));
  }
  if (p.is_identity()) return x;
  return EmbeddingMatrix::from_double(p.apply(x.to_double()), x.backend_id + "+" + p.label());
}

void Projection::save(const std::filesystem::path& path) const {
  const long d = static_cast<long>(input_dim_);
  const long k = identity_ ? 0 : basis_.rows();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(k + 3, d);
  rows.row(0) = mean_.transpose();
  if (k > 0) {
    rows.middleRows(1, k) = basis_;
    rows.row(k + 1).head(k) = scale_.transpose();
  }
  rows(k + 2, 0) = explained_variance_ratio_;
  write_embeddings(EmbeddingMatrix::from_double(rows, kSidecarId), path);
}

Projection projection_from_sidecar(const EmbeddingMatrix& m) {
  if (m.backend_id != kSidecarId || m.rows() < 3) {
    throw DataError("not a projection sidecar (backend id '" + m.backend_id + "')");
  }
  const Eigen::MatrixXd rows = m.to_double();
  const long k = rows.rows() - 3;
  const long d = rows.cols();
  if (k > d) throw DataError("projection sidecar has more components than dimensions");
  Projection p;
  p.input_dim_ = static_cast<std::size_t>(d);
  p.identity_ = k == 0;
  p.mean_ = rows.row(0).transpose();
  if (k > 0) {
    p.basis_ = rows.middleRows(1, k);
    p.scale_ = rows.row(k + 1).head(k).transpose();
  }
  p.explained_variance_ratio_ = rows(k + 2, 0);
  return p;
}

Projection Projection::load(const std::filesystem::path& path) {
  return projection_from_sidecar(read_embeddings(path));
}

}  // namespace apa
