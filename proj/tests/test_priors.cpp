#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rslimits/errors.hpp"
#include "rslimits/prior.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace rslimits;

TEST_CASE("two_point_prior p=0.5 is Rademacher") {
  const auto p = two_point_prior(0.5);
  REQUIRE(p.size() == 2);
  CHECK(p.dim() == 1);
  CHECK(p.atoms()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.atoms()(1, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(p.probs()[0] == 0.5);
  CHECK(p.probs()[1] == 0.5);
}

TEST_CASE("two_point_prior p=0.1 atoms") {
  const auto p = two_point_prior(0.1);
  CHECK(p.atoms()(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(p.atoms()(1, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(p.probs()[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(p.probs()[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("two_point_prior has mean 0 and variance 1 across p") {
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    const Moments m = moments(two_point_prior(p));
    CHECK(std::abs(m.mean[0]) <= 1e-12);
    CHECK(std::abs(m.second_moment(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(m.covariance(0, 0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("two_point_prior rejects p outside (0,1)") {
  CHECK_THROWS_AS(two_point_prior(0.0), DomainError);
  CHECK_THROWS_AS(two_point_prior(1.0), DomainError);
  CHECK_THROWS_AS(two_point_prior(-0.2), DomainError);
  CHECK_THROWS_AS(two_point_prior(std::nan("")), DomainError);
}

TEST_CASE("moments satisfy second_moment = covariance + mean mean'") {
  const DiscretePrior p = prior_of({{1.0, 2.0}, {-0.5, 0.25}, {3.0, -1.0}}, {0.2, 0.5, 0.3});
  const Moments m = moments(p);
  const Eigen::MatrixXd lhs = m.covariance + m.mean * m.mean.transpose();
  CHECK((lhs - m.second_moment).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.second_moment);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK(m.mean[0] == doctest::Approx(0.2 - 0.25 + 0.9));
}

TEST_CASE("product of two Rademachers") {
  const auto r = rademacher_prior();
  const auto p = product_prior(r, r);
  REQUIRE(p.size() == 4);
  CHECK(p.dim() == 2);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(p.probs()[i] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(p.atoms()(i, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(p.atoms()(i, 1)) == doctest::Approx(1.0));
  }
  const Moments m = moments(p);
  CHECK((m.second_moment - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("product with a point mass appends the coordinate") {
  const auto r = rademacher_prior();
  Eigen::VectorXd c(1);
  c << 0.7;
  const auto p = product_prior(r, point_mass(c));
  REQUIRE(p.size() == 2);
  CHECK(p.atoms()(0, 1) == 0.7);
  CHECK(p.atoms()(1, 1) == 0.7);
  CHECK(p.atoms()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("product of two two_point(0.1) priors") {
  const auto t = two_point_prior(0.1);
  const auto p = product_prior(t, t);
  REQUIRE(p.size() == 4);
  const double expected[] = {0.01, 0.09, 0.09, 0.81};
  for (int i = 0; i < 4; ++i) CHECK(p.probs()[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("product moments have block-diagonal covariance") {
  const DiscretePrior a = prior_of({{1.0}, {2.0}, {4.0}}, {0.2, 0.3, 0.5});
  const DiscretePrior b = prior_of({{0.0, 1.0}, {1.0, -1.0}}, {0.6, 0.4});
  const Moments m = moments(product_prior(a, b));
  CHECK(std::abs(m.covariance(0, 1)) <= 1e-12);
  CHECK(std::abs(m.covariance(0, 2)) <= 1e-12);
  CHECK(std::abs(m.covariance(1, 2)) > 1e-3); // within-block correlation survives
  CHECK(m.covariance(0, 0) == doctest::Approx(moments(a).covariance(0, 0)));
}

TEST_CASE("product support cap") {
  const DiscretePrior a = gaussian_discretization(101);
  CHECK_THROWS_AS(product_prior(a, a, 10000), SizeError);
  CHECK_NOTHROW(product_prior(a, a, 20000));
}

TEST_CASE("validation") {
  SUBCASE("probabilities must sum to one") {
    CHECK_THROWS_AS(prior_of({{1.0}, {-1.0}}, {0.5, 0.5 + 1e-9}), DomainError);
    CHECK_NOTHROW(prior_of({{1.0}, {-1.0}}, {0.5, 0.5 + 1e-13}));
  }
  SUBCASE("strictly positive probabilities") {
    CHECK_THROWS_AS(prior_of({{1.0}, {-1.0}, {0.0}}, {0.5, 0.5, 0.0}), DomainError);
  }
  SUBCASE("duplicate atoms are rejected, not merged") {
    CHECK_THROWS_AS(prior_of({{1.0}, {1.0 + 1e-13}}, {0.5, 0.5}), DomainError);
    CHECK_NOTHROW(prior_of({{1.0}, {1.0 + 1e-9}}, {0.5, 0.5}));
  }
  SUBCASE("non-finite atoms") {
    CHECK_THROWS_AS(prior_of({{1.0}, {INFINITY}}, {0.5, 0.5}), DomainError);
  }
  SUBCASE("size mismatch") { CHECK_THROWS_AS(prior_of({{1.0}, {2.0}}, {1.0}), DomainError); }
  SUBCASE("support cap") {
    std::vector<std::vector<double>> atoms;
    std::vector<double> probs;
    for (int i = 0; i < 11; ++i) {
      atoms.push_back({double(i)});
      probs.push_back(1.0 / 11.0);
    }
    CHECK_THROWS_AS(DiscretePrior(atoms, probs, 10), SizeError);
  }
}

TEST_CASE("every constructed prior is normalized") {
  for (const auto &p : {two_point_prior(0.3), rademacher_prior(), gaussian_discretization(41),
                        product_prior(two_point_prior(0.2), gaussian_discretization(7))}) {
    CHECK(std::abs(p.probs().sum() - 1.0) <= 1e-12);
    CHECK(p.probs().minCoeff() > 0.0);
  }
}

TEST_CASE("gaussian discretization matches N(0,1) moments") {
  const Moments m = moments(gaussian_discretization(41));
  CHECK(std::abs(m.mean[0]) <= 1e-14);
  CHECK(m.second_moment(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}
