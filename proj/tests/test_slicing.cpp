#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsdr/simgen.hpp"
#include "dsdr/slicing.hpp"

using namespace dsdr;

TEST_CASE("uniform grid over a range") {
  SliceSpec spec = make_slice_grid(0.0, 10.0, 10);
  REQUIRE(spec.grid.size() == 11);
  for (int h = 0; h <= 10; ++h) CHECK(spec.grid(h) == doctest::Approx(h).epsilon(1e-15));

  SliceSpec sym = make_slice_grid(-1.0, 1.0, 2);
  CHECK(sym.grid(0) == -1.0);
  CHECK(sym.grid(1) == 0.0);
  CHECK(sym.grid(2) == 1.0);
}

TEST_CASE("grid rejects degenerate input") {
  CHECK_THROWS_AS(make_slice_grid(5.0, 5.0, 3), DegenerateRange);
  CHECK_THROWS_AS(make_slice_grid(5.0, 4.0, 3), DegenerateRange);
  CHECK_THROWS_AS(make_slice_grid(0.0, 1.0, 1), InvalidSliceCount);
}

TEST_CASE("slice assignment boundaries") {
  SliceSpec spec;
  spec.grid.resize(3);
  spec.grid << 0.0, 1.0, 2.0;
  CHECK(assign_slice(0.5, spec) == 1);
  CHECK(assign_slice(1.0, spec) == 1);  // right-closed
  CHECK(assign_slice(0.0, spec) == 1);  // left endpoint absorbed into slice 1
  CHECK(assign_slice(1.5, spec) == 2);
  CHECK(assign_slice(2.0, spec) == 2);
  CHECK_THROWS_AS(assign_slice(-0.1, spec), OutOfRange);
  CHECK_THROWS_AS(assign_slice(2.1, spec), OutOfRange);
}

TEST_CASE("quantile grid splits counts evenly") {
  Rng rng(11, 1);
  VectorXd y(1000);
  for (int i = 0; i < 1000; ++i) y(i) = rng.normal();
  SliceSpec spec = make_quantile_grid(y, 10);
  REQUIRE(spec.slice_count() == 10);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(10);
  for (int i = 0; i < 1000; ++i) counts(assign_slice(y(i), spec) - 1) += 1;
  for (int h = 0; h < 10; ++h) CHECK(counts(h) == 100);
}

TEST_CASE("slice statistics on a hand-computed case") {
  Dataset data;
  data.x.resize(2, 1);
  data.x << -1.0, 1.0;
  data.y.resize(2);
  data.y << 0.2, 0.8;
  SliceSpec spec;
  spec.grid.resize(3);
  spec.grid << 0.0, 0.5, 1.0;

  SliceStats stats = slice_statistics(data, VectorXd::Zero(1), spec);
  CHECK(stats.counts(0) == 1);
  CHECK(stats.counts(1) == 1);
  CHECK(stats.sums(0, 0) == doctest::Approx(-1.0));
  CHECK(stats.sums(1, 0) == doctest::Approx(1.0));
  CHECK(stats.scatter(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("all responses in the first slice") {
  Dataset data;
  data.x.resize(3, 2);
  data.x << 1, 2, 3, 4, 5, 6;
  data.y.resize(3);
  data.y << 0.1, 0.2, 0.3;
  SliceSpec spec = make_slice_grid(0.0, 10.0, 5);
  SliceStats stats = slice_statistics(data, VectorXd::Zero(2), spec);
  CHECK(stats.counts(0) == 3);
  CHECK(stats.counts.tail(4).sum() == 0);
  CHECK(stats.sums.row(0).sum() == doctest::Approx(21.0));
}

TEST_CASE("centering identity: slice sums add to zero at the sample mean") {
  Rng rng(3, 9);
  Dataset data;
  data.x.resize(50, 4);
  data.y.resize(50);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 4; ++j) data.x(i, j) = rng.normal();
    data.y(i) = rng.normal();
  }
  VectorXd mean = data.x.colwise().mean();
  SliceSpec spec = make_slice_grid(data.y.minCoeff(), data.y.maxCoeff(), 5);
  SliceStats stats = slice_statistics(data, mean, spec);
  VectorXd total = stats.sums.colwise().sum();
  CHECK(total.cwiseAbs().maxCoeff() < 1e-10);
  long long n = 0;
  for (int h = 0; h < 5; ++h) n += stats.counts(h);
  CHECK(n == 50);
}

TEST_CASE("affine response map leaves assignments unchanged with a mapped grid") {
  Rng rng(17, 2);
  const int n = 200;
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal();
  SliceSpec spec = make_slice_grid(y.minCoeff(), y.maxCoeff(), 8);

  const double a = 2.5, b = -3.0;
  SliceSpec mapped;
  mapped.grid = a * spec.grid.array() + b;
  for (int i = 0; i < n; ++i)
    CHECK(assign_slice(y(i), spec) == assign_slice(a * y(i) + b, mapped));
}
