#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "liesde/flowtaylor.hpp"

using namespace liesde;

namespace {

PolyVectorField unit_x(std::size_t dim) {
  PolyVectorField f(dim);
  f.add_term(0, std::vector<int>(dim, 0), 1.0);
  return f;
}

// x d/dy on R^2: together with d/dx this generates a nilpotent pair whose
// flow truncates exactly at degree two.
PolyVectorField shear_xy() {
  PolyVectorField f(2);
  f.add_term(1, {1, 0}, 1.0);
  return f;
}

std::vector<PolyVectorField> nilpotent_pair() {
  return {PolyVectorField::zero(2), unit_x(2), shear_xy()};
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("flowtaylor") {

TEST_CASE("word enumeration follows the scaling degree") {
  SUBCASE("one letter, degree one") {
    std::vector<MultiIndex> words = enumerate_multiindices(1, 1);
    REQUIRE(words.size() == 1);
    CHECK(words[0] == MultiIndex{1});
  }

  SUBCASE("one letter, degree two") {
    std::vector<MultiIndex> words = enumerate_multiindices(1, 2);
    std::vector<MultiIndex> expect = {MultiIndex{1}, MultiIndex{0},
                                      MultiIndex{1, 1}};
    CHECK(words == expect);
  }

  SUBCASE("two letters, degree two") {
    std::vector<MultiIndex> words = enumerate_multiindices(2, 2);
    std::vector<MultiIndex> expect = {MultiIndex{1},    MultiIndex{2},
                                      MultiIndex{0},    MultiIndex{1, 1},
                                      MultiIndex{1, 2}, MultiIndex{2, 1},
                                      MultiIndex{2, 2}};
    CHECK(words == expect);
  }

  SUBCASE("degree zero is rejected") {
    CHECK_THROWS_AS(enumerate_multiindices(1, 0), std::invalid_argument);
  }
}

TEST_CASE("bracket coefficient fields") {
  std::vector<PolyVectorField> fields = nilpotent_pair();

  SUBCASE("single letters return the generator verbatim") {
    CHECK(approx_equal(beta_field(MultiIndex{1}, fields), fields[1], 0.0));
    CHECK(approx_equal(beta_field(MultiIndex{2}, fields), fields[2], 0.0));
  }

  SUBCASE("the two-letter word is half the bracket") {
    PolyVectorField expect = bracket(fields[1], fields[2]).scaled(0.5);
    CHECK(approx_equal(beta_field(MultiIndex{1, 2}, fields), expect, 0.0));
    // Here [d/dx, x d/dy] = d/dy.
    PolyVectorField ddy(2);
    ddy.add_term(1, {0, 0}, 0.5);
    CHECK(approx_equal(beta_field(MultiIndex{1, 2}, fields), ddy, 0.0));
  }

  SUBCASE("repeated letters vanish structurally") {
    CHECK(beta_field(MultiIndex{1, 1}, fields).is_zero(0.0));
  }

  SUBCASE("level-two antisymmetry") {
    PolyVectorField sum = beta_field(MultiIndex{1, 2}, fields) +
                          beta_field(MultiIndex{2, 1}, fields);
    CHECK(sum.is_zero(0.0));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(beta_field(MultiIndex{}, fields), std::invalid_argument);
    CHECK_THROWS_AS(beta_field(MultiIndex{1, 2, 1, 2, 1, 2}, fields),
                    std::invalid_argument);
    CHECK_THROWS_AS(beta_field(MultiIndex{7}, fields), std::out_of_range);
  }
}

TEST_CASE("beta table skips zero fields and zero words") {
  std::vector<BracketCoefficient> table = beta_table(nilpotent_pair(), 2);
  // Expected surviving words: (1), (2), (1,2), (2,1); the drift slot is the
  // zero field and (1,1), (2,2) vanish.
  REQUIRE(table.size() == 4);
  CHECK(table[0].index == MultiIndex{1});
  CHECK(table[1].index == MultiIndex{2});
  CHECK(table[2].index == MultiIndex{1, 2});
  CHECK(table[3].index == MultiIndex{2, 1});
}

TEST_CASE("flow map oracles") {
  SUBCASE("zero field is the identity") {
    Eigen::VectorXd z = vec2(0.4, -0.2);
    CHECK((flow_exp(PolyVectorField::zero(2), z) - z).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SUBCASE("constant field translates") {
    PolyVectorField c(2);
    c.add_term(0, {0, 0}, 0.3);
    c.add_term(1, {0, 0}, -1.1);
    Eigen::VectorXd z = vec2(1.0, 2.0);
    Eigen::VectorXd out = flow_exp(c, z);
    CHECK(std::abs(out(0) - 1.3) <= 1e-14);
    CHECK(std::abs(out(1) - 0.9) <= 1e-14);
  }

  SUBCASE("scaling field exponentiates at fourth order") {
    PolyVectorField scaling(1);
    scaling.add_term(0, {1}, 1.0);
    Eigen::VectorXd z(1);
    z << 1.0;
    // Classic RK4 on x'=x has global error ~ e*h^4/120: 1.35e-9 at 64
    // steps, 8.4e-11 at 128.
    const double e64 = std::abs(flow_exp(scaling, z, 64)(0) - std::exp(1.0));
    const double e128 = std::abs(flow_exp(scaling, z, 128)(0) - std::exp(1.0));
    CHECK(e64 <= 2e-9);
    CHECK(e128 <= 1e-10);
    CHECK(e64 / e128 >= 12.0);  // halving h buys ~2^4
    CHECK(e64 / e128 <= 20.0);
  }

  SUBCASE("finite-time blowup raises") {
    PolyVectorField quad(1);
    quad.add_term(0, {2}, 1.0);
    Eigen::VectorXd z(1);
    z << 1e6;
    CHECK_THROWS_AS(flow_exp(quad, z, 64), std::runtime_error);
  }
}

TEST_CASE("nilpotent truncation is exact at degree two") {
  std::vector<PolyVectorField> fields = nilpotent_pair();
  TimeGrid grid(1.0, 256);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 97, 0));
  IteratedIntegralTable table(path);
  Eigen::VectorXd z0 = vec2(0.5, -0.25);

  const std::vector<double>& b12 = table.integral(MultiIndex{1, 2});
  for (std::size_t node : {std::size_t{64}, std::size_t{128}, std::size_t{256}}) {
    const double b1 = path.value(node, 1);
    const double b2 = path.value(node, 2);
    Eigen::VectorXd hand =
        vec2(z0(0) + b1, z0(1) + z0(0) * b2 + b12[node]);

    Eigen::VectorXd deg2 = taylor_flow(fields, table, 2, z0, node);
    CHECK((deg2 - hand).cwiseAbs().maxCoeff() <= 1e-10);

    // Degree one misses exactly the level-two loading.
    Eigen::VectorXd deg1 = taylor_flow(fields, table, 1, z0, node);
    const double missing = std::abs(b12[node] - 0.5 * b1 * b2);
    CHECK(std::abs(std::abs(deg1(1) - hand(1)) - missing) <= 1e-12);
    CHECK(std::abs(deg1(0) - hand(0)) <= 1e-12);
  }
}

TEST_CASE("assembled log field matches the hand formula") {
  std::vector<PolyVectorField> fields = nilpotent_pair();
  TimeGrid grid(1.0, 64);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 5, 0));
  IteratedIntegralTable table(path);
  const std::size_t node = 64;

  TruncatedLogFlow log_flow =
      truncated_log_flow(beta_table(fields, 2), table, node);
  CHECK(log_flow.max_degree == 2);
  CHECK(log_flow.loadings.size() == 4);

  const double b1 = path.value(node, 1);
  const double b2 = path.value(node, 2);
  const double area = 0.5 * (table.integral(MultiIndex{1, 2})[node] -
                             table.integral(MultiIndex{2, 1})[node]);
  PolyVectorField expect(2);
  expect.add_term(0, {0, 0}, b1);          // B^1 d/dx
  expect.add_term(1, {1, 0}, b2);          // B^2 x d/dy
  expect.add_term(1, {0, 0}, area);        // half the antisymmetrized area
  CHECK(approx_equal(log_flow.zeta, expect, 1e-14));
}

TEST_CASE("commuting generators collapse to a single exponential") {
  std::vector<PolyVectorField> fields = {PolyVectorField::zero(2), unit_x(2)};
  PolyVectorField ddy(2);
  ddy.add_term(1, {0, 0}, 1.0);
  fields.push_back(ddy);

  TimeGrid grid(1.0, 128);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 6, 0));
  IteratedIntegralTable table(path);
  const std::size_t node = 128;
  const double b1 = path.value(node, 1);
  const double b2 = path.value(node, 2);

  Eigen::VectorXd z0 = vec2(0.1, 0.2);
  Eigen::VectorXd out = taylor_flow(fields, table, 1, z0, node);
  PolyVectorField summed = fields[1].scaled(b1) + fields[2].scaled(b2);
  Eigen::VectorXd direct = flow_exp(summed, z0);
  CHECK((out - direct).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(std::abs(out(0) - (z0(0) + b1)) <= 1e-14);
  CHECK(std::abs(out(1) - (z0(1) + b2)) <= 1e-14);
}

TEST_CASE("abelian scaling system hits the closed form") {
  PolyVectorField scaling(1);
  scaling.add_term(0, {1}, 1.0);
  std::vector<PolyVectorField> fields = {scaling.scaled(0.08),
                                         scaling.scaled(0.2)};
  TimeGrid grid(1.0, 256);
  DrivingPath path = with_time_component(sample_brownian(grid, 1, 53, 0));
  IteratedIntegralTable table(path);
  Eigen::VectorXd q0(1);
  q0 << 1.0;
  const std::size_t node = 256;
  // Degree two picks up the drift word (0) (scaling degree 2) and the zero
  // bracket words, so the truncation is the full abelian solution.
  Eigen::VectorXd out = taylor_flow(fields, table, 2, q0, node);
  const double closed = std::exp(0.08 + 0.2 * path.value(node, 1));
  CHECK(std::abs(out(0) - closed) <= 1e-8);
}

TEST_CASE("taylor flow is deterministic") {
  std::vector<PolyVectorField> fields = nilpotent_pair();
  TimeGrid grid(1.0, 64);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 11, 0));
  IteratedIntegralTable t1(path);
  IteratedIntegralTable t2(path);
  Eigen::VectorXd z0 = vec2(0.5, -0.25);
  Eigen::VectorXd a = taylor_flow(fields, t1, 2, z0, 32);
  Eigen::VectorXd b = taylor_flow(fields, t2, 2, z0, 32);
  CHECK(a == b);
}

TEST_CASE("fixed points stay fixed at every degree") {
  PolyVectorField lin_x(2);
  lin_x.add_term(0, {1, 0}, 1.0);  // x d/dx
  PolyVectorField lin_xy(2);
  lin_xy.add_term(1, {1, 0}, 1.0);  // x d/dy
  std::vector<PolyVectorField> fields = {PolyVectorField::zero(2), lin_x,
                                         lin_xy};
  TimeGrid grid(1.0, 64);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 12, 0));
  Eigen::VectorXd origin = vec2(0.0, 0.0);
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    IteratedIntegralTable table(path);
    Eigen::VectorXd out = taylor_flow(fields, table, n, origin, 64);
    CHECK(out.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("remainder studies") {
  std::vector<PolyVectorField> fields = nilpotent_pair();
  Eigen::VectorXd z0 = vec2(0.5, -0.25);
  const std::vector<double> t_list = {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0};

  SUBCASE("exact truncation lands on the integrator floor") {
    RemainderStudy study =
        remainder_slope(fields, z0, 2, t_list, 8, 2024, 256, 8);
    CHECK(study.at_floor);
    CHECK_FALSE(study.slope.has_value());
  }

  SUBCASE("degree one loses the level-two term at slope about one") {
    RemainderStudy study =
        remainder_slope(fields, z0, 1, t_list, 32, 2024, 512, 8);
    CHECK_FALSE(study.at_floor);
    REQUIRE(study.slope.has_value());
    CHECK(*study.slope >= 0.6);
    CHECK(*study.slope <= 1.4);
  }

  SUBCASE("raising the degree steepens a non-nilpotent remainder") {
    PolyVectorField quad(1);
    quad.add_term(0, {2}, 1.0);
    std::vector<PolyVectorField> sl2 = {PolyVectorField::zero(1), unit_x(1),
                                        quad};
    Eigen::VectorXd x0(1);
    x0 << 0.7;
    // The pair does not commute, so the pathwise reference floor only
    // shrinks like sqrt(h); the coarse grid must be fine enough for the
    // degree-three remainder to clear it.
    const std::vector<double> window = {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
    RemainderStudy deg2 =
        remainder_slope(sl2, x0, 2, window, 24, 7, 32768, 8, 3.0, 8);
    RemainderStudy deg3 =
        remainder_slope(sl2, x0, 3, window, 24, 7, 32768, 8, 3.0, 8);
    REQUIRE(deg2.slope.has_value());
    REQUIRE(deg3.slope.has_value());
    CHECK(*deg2.slope >= 1.2);  // (N+1)/2 - 0.3
    CHECK(*deg3.slope >= 1.7);
    CHECK(*deg3.slope > *deg2.slope);
  }

  SUBCASE("at least two evaluation times are required") {
    CHECK_THROWS_AS(remainder_slope(fields, z0, 1, {0.25}, 4, 1, 64, 8),
                    std::invalid_argument);
  }
}

TEST_CASE("study csv layout") {
  RemainderStudy study;
  study.times = {0.25, 0.5};
  study.mean_error = {1e-3, 2e-3};
  study.floor_error = {1e-5, 1e-5};
  study.slope = 1.0;
  std::ostringstream os;
  write_taylor_csv(os, study, 1);
  CHECK(os.str().substr(0, 19) == "t,N,mean_err,slope\n");
}

}  // TEST_SUITE("flowtaylor")
