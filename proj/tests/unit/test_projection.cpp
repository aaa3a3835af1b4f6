#include <gtest/gtest.h>

#include <filesystem>

#include <Eigen/Eigenvalues>

#include "apa/error.hpp"
#include "apa/projection.hpp"
#include "fixtures.hpp"

namespace {

apa::EmbeddingMatrix as_embeddings(const Eigen::MatrixXd& m) {
  return apa::EmbeddingMatrix::from_double(m, "test");
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

TEST(Projection, SpecParsing) {
  EXPECT_TRUE(apa::ProjectionSpec::parse("np").is_identity());
  EXPECT_EQ(apa::ProjectionSpec::parse("pca10").components, 10u);
  EXPECT_EQ(apa::ProjectionSpec::parse("pca100").components, 100u);
  EXPECT_EQ(apa::ProjectionSpec::parse("pca10").label(), "pca10");
  EXPECT_THROW(apa::ProjectionSpec::parse("pca"), apa::ConfigError);
  EXPECT_THROW(apa::ProjectionSpec::parse("pca0"), apa::ConfigError);
  EXPECT_THROW(apa::ProjectionSpec::parse("lda10"), apa::ConfigError);
}

TEST(Projection, WhitenedFitDataHasZeroMeanAndIdentityCovariance) {
  // Correlated data: x = z A with random A.
  const Eigen::MatrixXd z = apa::testing::gaussian_rows(400, 12, 1);
  const Eigen::MatrixXd a = apa::testing::gaussian_rows(12, 12, 2);
  const Eigen::MatrixXd x = (z * a).array() + 3.0;
  // Round through float32 as the pipeline does.
  const auto e = as_embeddings(x);
  const Eigen::MatrixXd xf = e.to_double();
  for (std::size_t k : {1u, 5u, 10u}) {
    const apa::Projection p = apa::fit_projection(e, k);
    const Eigen::MatrixXd y = p.apply(xf);
    ASSERT_EQ(static_cast<std::size_t>(y.cols()), k);
    EXPECT_LT(y.colwise().mean().cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((covariance(y) - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((p.basis() * p.basis().transpose() - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Projection, LeadingComponentsMatchCovarianceEigenvectors) {
  const Eigen::MatrixXd z = apa::testing::gaussian_rows(500, 6, 3);
  Eigen::VectorXd sd(6);
  sd << 5.0, 3.0, 2.0, 1.0, 0.5, 0.25;
  const Eigen::MatrixXd x = z * sd.asDiagonal();
  const auto e = as_embeddings(x);
  const apa::Projection p = apa::fit_projection(e, 3);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance(e.to_double()));
  const Eigen::VectorXd evals = es.eigenvalues().reverse();
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd v = es.eigenvectors().col(5 - i);
    EXPECT_NEAR(std::fabs(p.basis().row(i).dot(v)), 1.0, 1e-9);
    EXPECT_NEAR(p.scale()(i), 1.0 / std::sqrt(evals(i)), 1e-9);
  }
  EXPECT_NEAR(p.explained_variance_ratio(), evals.head(3).sum() / evals.sum(), 1e-12);
}

TEST(Projection, IdentityLeavesDataUntouched) {
  const auto e = as_embeddings(apa::testing::gaussian_rows(5, 4, 4));
  const apa::Projection p = apa::fit_projection(e, apa::ProjectionSpec{});
  EXPECT_TRUE(p.is_identity());
  const apa::EmbeddingMatrix out = apa::apply_projection(p, e);
  EXPECT_TRUE(out.data == e.data);
  EXPECT_EQ(out.backend_id, e.backend_id);
}

TEST(Projection, InvalidFits) {
  const auto e = as_embeddings(apa::testing::gaussian_rows(8, 4, 5));
  EXPECT_THROW(apa::fit_projection(e, 0), apa::ConfigError);
  EXPECT_THROW(apa::fit_projection(e, 5), apa::ConfigError);
  EXPECT_THROW(apa::fit_projection(as_embeddings(apa::testing::gaussian_rows(3, 10, 6)), 3),
               apa::ConfigError);

  const auto constant = as_embeddings(Eigen::MatrixXd::Constant(10, 4, 2.0));
  EXPECT_THROW(apa::fit_projection(constant, 1), apa::MathDomainError);

  // Rank 1 data cannot give two components.
  Eigen::MatrixXd r1(10, 3);
  for (int i = 0; i < 10; ++i) r1.row(i) << i, 2 * i, -i;
  EXPECT_THROW(apa::fit_projection(as_embeddings(r1), 2), apa::MathDomainError);

  const apa::Projection p = apa::fit_projection(e, 2);
  EXPECT_THROW(apa::apply_projection(p, as_embeddings(apa::testing::gaussian_rows(3, 5, 7))), apa::DataError);
}

TEST(Projection, SidecarRoundTrip) {
  const auto e = as_embeddings(apa::testing::gaussian_rows(50, 8, 8));
  const apa::Projection p = apa::fit_projection(e, 4);
  const auto path = std::filesystem::temp_directory_path() / "apa_unit_projection.aemb";
  p.save(path);
  const apa::Projection q = apa::Projection::load(path);
  EXPECT_FALSE(q.is_identity());
  EXPECT_EQ(q.output_dim(), 4u);
  const Eigen::MatrixXd x = e.to_double();
  // Parameters are stored as float32.
  EXPECT_LT((p.apply(x) - q.apply(x)).cwiseAbs().maxCoeff(), 1e-4);

  apa::Projection::identity(8).save(path);
  EXPECT_TRUE(apa::Projection::load(path).is_identity());
}

}  // namespace
