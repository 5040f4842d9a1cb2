#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "liesde/weinorman.hpp"

using namespace liesde;

namespace {

MatrixLieGroup heisenberg() {
  Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd e23 = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd e13 = Eigen::MatrixXd::Zero(3, 3);
  e12(0, 1) = 1.0;
  e23(1, 2) = 1.0;
  e13(0, 2) = 1.0;
  return MatrixLieGroup::custom("heisenberg", 3, {e12, e23, e13});
}

}  // namespace

TEST_SUITE("weinorman") {

TEST_CASE("coordinate matrix") {
  SUBCASE("zero coordinates give the identity") {
    for (const MatrixLieGroup& g :
         {MatrixLieGroup::affine1(), MatrixLieGroup::so3()}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(g.algebra_dim());
      CHECK((wn_matrix(g, d) -
             Eigen::MatrixXd::Identity(g.algebra_dim(), g.algebra_dim()))
                .cwiseAbs()
                .maxCoeff() <= 1e-14);
    }
  }

  SUBCASE("affine structure [[1, -d0], [0, 1]]") {
    MatrixLieGroup aff = MatrixLieGroup::affine1();
    for (double d0 : {-1.5, 0.25, 2.0}) {
      Eigen::VectorXd d(2);
      d << d0, 0.8;  // the scaling coordinate never enters
      Eigen::MatrixXd m = wn_matrix(aff, d);
      Eigen::MatrixXd expect(2, 2);
      expect << 1.0, -d0, 0.0, 1.0;
      CHECK((m - expect).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(m.determinant() - 1.0) <= 1e-12);
    }
  }

  SUBCASE("abelian groups keep the identity for every d") {
    MatrixLieGroup diag = MatrixLieGroup::pos_diag(3);
    Eigen::VectorXd d(3);
    d << 1.7, -0.4, 0.9;
    CHECK((wn_matrix(diag, d) - Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
  }

  SUBCASE("nilpotent coordinate matrix is unipotent") {
    MatrixLieGroup heis = heisenberg();
    Eigen::VectorXd d(3);
    d << 0.7, -1.2, 0.3;
    Eigen::MatrixXd m = wn_matrix(heis, d);
    CHECK(std::abs(m.determinant() - 1.0) <= 1e-12);
  }

  SUBCASE("coordinate count must match") {
    CHECK_THROWS_AS(wn_matrix(MatrixLieGroup::affine1(), Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
  }
}

TEST_CASE("coordinate integration") {
  SUBCASE("zero path keeps everything at zero") {
    MatrixLieGroup aff = MatrixLieGroup::affine1();
    TimeGrid grid(1.0, 16);
    DrivingPath zero(grid, 2);
    WeiNormanResult res = integrate_wei_norman(aff, zero);
    CHECK_FALSE(res.singular_index.has_value());
    for (const auto& d : res.coordinates) {
      CHECK(d.cwiseAbs().maxCoeff() == 0.0);
    }
    for (const auto& g : res.reconstructed.elements) {
      CHECK((g - aff.identity()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("abelian coordinates copy the path") {
    MatrixLieGroup diag = MatrixLieGroup::pos_diag(2);
    TimeGrid grid(1.0, 512);
    DrivingPath b2 = sample_brownian(grid, 2, 17, 0);
    WeiNormanResult res = integrate_wei_norman(diag, b2);
    double worst = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      for (std::size_t i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(res.coordinates[k](
                                    static_cast<Eigen::Index>(i)) -
                                         b2.value(k, i)));
      }
    }
    CHECK(worst <= 1e-12);
  }

  SUBCASE("affine coordinates against the quadrature closed form") {
    MatrixLieGroup aff = MatrixLieGroup::affine1();
    TimeGrid grid(1.0, 1024);
    DrivingPath path =
        with_time_component(sample_brownian(grid, 1, 23, 0));
    WeiNormanResult numeric = integrate_wei_norman(aff, path);
    WeiNormanResult closed = affine_closed_form(path);
    REQUIRE_FALSE(numeric.singular_index.has_value());

    double d1_dev = 0.0, d0_dev = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      d1_dev = std::max(d1_dev, std::abs(numeric.coordinates[k](1) -
                                         path.value(k, 1)));
      d0_dev = std::max(d0_dev, std::abs(numeric.coordinates[k](0) -
                                         closed.coordinates[k](0)));
    }
    CHECK(d1_dev <= 1e-13);  // the scaling row of M is constant
    CHECK(d0_dev <= 2e-3);

    // Reconstruction agrees with the exponential-Euler benchmark.
    GroupTrajectory direct = integrate_group_sde(aff, path, aff.identity());
    double rec_dev = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      rec_dev = std::max(rec_dev,
                         (numeric.reconstructed.elements[k] -
                          direct.elements[k])
                             .cwiseAbs()
                             .maxCoeff());
    }
    CHECK(rec_dev <= 5e-3);
  }

  SUBCASE("abelian reconstruction is exact") {
    MatrixLieGroup diag = MatrixLieGroup::pos_diag(2);
    TimeGrid grid(1.0, 256);
    DrivingPath b2 = sample_brownian(grid, 2, 29, 0);
    WeiNormanResult res = integrate_wei_norman(diag, b2);
    GroupTrajectory direct = integrate_group_sde(diag, b2, diag.identity());
    double worst = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      worst = std::max(worst, (res.reconstructed.elements[k] -
                               direct.elements[k])
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    CHECK(worst <= 1e-12);
  }

  SUBCASE("nilpotent groups never go singular on bounded paths") {
    MatrixLieGroup heis = heisenberg();
    TimeGrid grid(1.0, 512);
    DrivingPath b3 = sample_brownian(grid, 3, 37, 0);
    WeiNormanResult res = integrate_wei_norman(heis, b3);
    CHECK_FALSE(res.singular_index.has_value());

    GroupTrajectory direct = integrate_group_sde(heis, b3, heis.identity());
    double worst = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      worst = std::max(worst, (res.reconstructed.elements[k] -
                               direct.elements[k])
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    CHECK(worst <= 5e-3);
  }

  SUBCASE("an impossible condition cap trips immediately") {
    MatrixLieGroup aff = MatrixLieGroup::affine1();
    TimeGrid grid(1.0, 8);
    DrivingPath path = with_time_component(sample_brownian(grid, 1, 3, 0));
    WeiNormanResult res = integrate_wei_norman(aff, path, 0.5);
    REQUIRE(res.singular_index.has_value());
    CHECK(*res.singular_index == 0);
    CHECK_FALSE(res.valid_at(0));
    for (const auto& d : res.coordinates) {
      CHECK(d.cwiseAbs().maxCoeff() == 0.0);  // frozen at the start
    }
  }
}

TEST_CASE("affine closed form edge cases") {
  TimeGrid grid(1.0, 1024);

  SUBCASE("flat scaling component reduces to the translation path") {
    DrivingPath b = sample_brownian(grid, 1, 43, 0);
    DrivingPath path(grid, 2);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      path.value_ref(k, 0) = b.value(k, 0);
    }
    WeiNormanResult res = affine_closed_form(path);
    double worst = 0.0;
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      worst = std::max(worst, std::abs(res.coordinates[k](0) -
                                       path.value(k, 0)));
    }
    CHECK(worst <= 1e-12);
  }

  SUBCASE("flat translation component gives zero") {
    DrivingPath b = sample_brownian(grid, 1, 44, 0);
    DrivingPath path(grid, 2);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      path.value_ref(k, 1) = b.value(k, 0);
    }
    WeiNormanResult res = affine_closed_form(path);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(res.coordinates[k](0) == 0.0);
    }
  }

  SUBCASE("deterministic ramp hits the scalar quadrature value") {
    DrivingPath path(grid, 2);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      path.value_ref(k, 0) = grid.node(k);
      path.value_ref(k, 1) = grid.node(k);
    }
    WeiNormanResult res = affine_closed_form(path);
    // d0(1) = e * int_0^1 e^{-s} ds = e - 1.
    CHECK(std::abs(res.coordinates.back()(0) - (std::exp(1.0) - 1.0)) <= 1e-5);
  }

  SUBCASE("path must have two components") {
    DrivingPath path(grid, 3);
    CHECK_THROWS_AS(affine_closed_form(path), std::invalid_argument);
  }
}

TEST_CASE("coordinate csv layout") {
  MatrixLieGroup diag = MatrixLieGroup::pos_diag(2);
  TimeGrid grid(1.0, 2);
  DrivingPath b2 = sample_brownian(grid, 2, 1, 0);
  WeiNormanResult res = integrate_wei_norman(diag, b2);
  std::ostringstream os;
  write_weinorman_csv(os, res);
  CHECK(os.str().substr(0, 14) == "t,d0,d1,valid\n");
}

}  // TEST_SUITE("weinorman")
