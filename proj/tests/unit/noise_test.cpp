#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "liesde/noise.hpp"

using namespace liesde;

TEST_SUITE("noise") {

TEST_CASE("grid nodes and guards") {
  TimeGrid grid(1.0, 4);
  CHECK(grid.dt() == doctest::Approx(0.25));
  CHECK(grid.node(0) == 0.0);
  CHECK(grid.node(4) == 1.0);
  CHECK(grid.node_count() == 5);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(-1.0, 4), std::invalid_argument);
}

TEST_CASE("brownian sampling starts at zero and is reproducible") {
  TimeGrid grid(1.0, 4);
  DrivingPath a = sample_brownian(grid, 1, 42, 0);
  CHECK(a.grid.node_count() == 5);
  CHECK(a.dim == 1);
  CHECK(a.value(0, 0) == 0.0);
  CHECK(a.roles[0] == ComponentRole::Brownian);
  a.validate();

  DrivingPath b = sample_brownian(grid, 1, 42, 0);
  CHECK(a.values == b.values);  // bit-identical

  DrivingPath c = sample_brownian(grid, 1, 42, 1);
  CHECK(a.values != c.values);
  DrivingPath d = sample_brownian(grid, 1, 43, 0);
  CHECK(a.values != d.values);

  CHECK_THROWS_AS(sample_brownian(grid, 0, 42, 0), std::invalid_argument);
}

TEST_CASE("terminal marginals match the standard normal") {
  // B_1 ~ N(0,1) regardless of step count; 10^4 paths per component.
  TimeGrid grid(1.0, 8);
  const std::size_t n = 10000;
  for (std::size_t comp = 0; comp < 2; ++comp) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      DrivingPath path = sample_brownian(grid, 2, 20240815, p);
      const double b1 = path.value(grid.steps, comp);
      sum += b1;
      sumsq += b1 * b1;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sumsq / static_cast<double>(n) - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("time component is exact at the nodes") {
  TimeGrid grid(1.0, 4);
  DrivingPath b = sample_brownian(grid, 1, 7, 0);
  DrivingPath p = with_time_component(b);
  CHECK(p.dim == 2);
  CHECK(p.roles[0] == ComponentRole::Time);
  for (std::size_t k = 0; k <= 4; ++k) {
    CHECK(p.value(k, 0) == grid.node(k));
    CHECK(p.value(k, 1) == b.value(k, 0));
  }

  DrivingPath twice = with_time_component(p);
  CHECK(twice.dim == 3);
  CHECK(twice.roles[0] == ComponentRole::Time);
  CHECK(twice.roles[1] == ComponentRole::Time);
  for (std::size_t k = 0; k <= 4; ++k) {
    CHECK(twice.value(k, 0) == grid.node(k));
    CHECK(twice.value(k, 1) == grid.node(k));
  }

  DrivingPath empty(grid, 0);
  DrivingPath pure = with_time_component(empty);
  CHECK(pure.dim == 1);
  CHECK(pure.value(3, 0) == grid.node(3));
  pure.validate();
}

TEST_CASE("subsample restricts node values verbatim") {
  TimeGrid fine(1.0, 16);
  DrivingPath path = with_time_component(sample_brownian(fine, 1, 5, 0));
  DrivingPath coarse = subsample(path, 4);
  CHECK(coarse.grid.steps == 4);
  for (std::size_t k = 0; k <= 4; ++k) {
    CHECK(coarse.value(k, 0) == path.value(4 * k, 0));
    CHECK(coarse.value(k, 1) == path.value(4 * k, 1));
  }
  coarse.validate();  // the time component must still sit on the coarse grid
  CHECK_THROWS_AS(subsample(path, 3), std::invalid_argument);
}

TEST_CASE("midpoint integral oracles") {
  TimeGrid grid(1.0, 256);
  DrivingPath path = with_time_component(sample_brownian(grid, 1, 11, 0));

  SUBCASE("unit integrand reproduces the integrator component") {
    std::vector<double> ones(grid.node_count(), 1.0);
    std::vector<double> integral = stratonovich_integral(ones, path, 1);
    CHECK(integral[0] == 0.0);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(std::abs(integral[k] - path.value(k, 1)) <= 1e-12);
    }
  }

  SUBCASE("B against B telescopes to B^2/2") {
    std::vector<double> b = path.component(1);
    std::vector<double> integral = stratonovich_integral(b, path, 1);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(std::abs(integral[k] - 0.5 * b[k] * b[k]) <= 1e-12);
    }
  }

  SUBCASE("t against t stays within the trapezoid bound") {
    std::vector<double> t = path.component(0);
    std::vector<double> integral = stratonovich_integral(t, path, 0);
    const double h = grid.dt();
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(std::abs(integral[k] - 0.5 * t[k] * t[k]) <= h * h / 8.0);
    }
  }

  SUBCASE("bad component and short integrand are rejected") {
    std::vector<double> ones(grid.node_count(), 1.0);
    CHECK_THROWS_AS(stratonovich_integral(ones, path, 9), std::out_of_range);
    std::vector<double> shorty(3, 1.0);
    CHECK_THROWS_AS(stratonovich_integral(shorty, path, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("multi-index degree counts zeros twice") {
  CHECK(degree(MultiIndex{1, 2}) == 2);
  CHECK(degree(MultiIndex{0, 1}) == 3);
  CHECK(degree(MultiIndex{0, 0}) == 4);
  CHECK(degree(MultiIndex{2}) == 1);
}

TEST_CASE("iterated integral table") {
  TimeGrid grid(1.0, 512);
  DrivingPath path = with_time_component(sample_brownian(grid, 2, 3, 0));
  IteratedIntegralTable table(path);

  SUBCASE("time word is the grid, bitwise") {
    const std::vector<double>& b0 = table.integral(MultiIndex{0});
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(b0[k] == grid.node(k));
    }
  }

  SUBCASE("every word starts at zero") {
    for (const MultiIndex& J :
         {MultiIndex{0}, MultiIndex{1, 2}, MultiIndex{2, 1, 1}}) {
      CHECK(table.integral(J)[0] == 0.0);
    }
  }

  SUBCASE("repeated-letter square identity") {
    const std::vector<double>& b11 = table.integral(MultiIndex{1, 1});
    std::vector<double> b1 = path.component(1);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      CHECK(std::abs(b11[k] - 0.5 * b1[k] * b1[k]) <= 1e-12);
    }
  }

  SUBCASE("shuffle identity at every node") {
    const std::vector<double> b12 = table.integral(MultiIndex{1, 2});
    const std::vector<double> b21 = table.integral(MultiIndex{2, 1});
    std::vector<double> b1 = path.component(1);
    std::vector<double> b2 = path.component(2);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
      const double prod = b1[k] * b2[k];
      const double rel =
          std::abs(b12[k] + b21[k] - prod) / std::max(1.0, std::abs(prod));
      CHECK(rel <= 1e-12);
    }
  }

  SUBCASE("cache transparency") {
    const std::vector<double>& first = table.integral(MultiIndex{1, 2, 1});
    const std::vector<double>& again = table.integral(MultiIndex{1, 2, 1});
    CHECK(&first == &again);  // the cached vector itself

    IteratedIntegralTable cold(path);
    // Warm the sub-words in a different order first.
    cold.integral(MultiIndex{1, 2});
    CHECK(cold.integral(MultiIndex{1, 2, 1}) == first);
  }

  SUBCASE("bad words are rejected") {
    CHECK_THROWS_AS(table.integral(MultiIndex{}), std::invalid_argument);
    CHECK_THROWS_AS(table.integral(MultiIndex{5}), std::out_of_range);
  }
}

TEST_CASE("path csv layout is stable") {
  TimeGrid grid(1.0, 2);
  DrivingPath path = with_time_component(sample_brownian(grid, 1, 1, 0));
  std::ostringstream a, b;
  write_path_csv(a, path);
  write_path_csv(b, path);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, 8) == "t,x0,x1\n");
  int rows = 0;
  for (char ch : a.str()) rows += ch == '\n' ? 1 : 0;
  CHECK(rows == 4);  // header + 3 nodes
}

}  // TEST_SUITE("noise")
