#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/csv.hpp"
#include "exitctl/rng.hpp"
#include "exitctl/stats.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace exitctl;

namespace {

std::vector<double> sample_values(std::size_t n) {
  NoiseStream s(7);
  std::vector<double> v(n), z(1);
  for (std::size_t i = 0; i < n; ++i) {
    s.normals(i, z);
    v[i] = 3.0 + 2.0 * z[0];
  }
  return v;
}

}  // namespace

TEST_CASE("welford agrees with two-pass moments") {
  const auto v = sample_values(5000);
  double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  const auto r = summarize(v);
  CHECK(r.mean == doctest::Approx(m).epsilon(1e-13));
  CHECK(r.variance == doctest::Approx(ss / (v.size() - 1)).epsilon(1e-12));
  CHECK(r.std_error == doctest::Approx(std::sqrt(r.variance / v.size())).epsilon(1e-14));
  CHECK(r.n_samples == v.size());
}

TEST_CASE("merging partial accumulators matches one pass") {
  const auto v = sample_values(1001);
  RunningStats a, b, all;
  for (std::size_t i = 0; i < v.size(); ++i) (i < 400 ? a : b).add(v[i]), all.add(v[i]);
  a.merge(b);
  CHECK(a.n == all.n);
  CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-13));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  RunningStats empty;
  empty.merge(all);
  CHECK(empty.mean == all.mean);
}

TEST_CASE("covariance accumulator") {
  RunningCovariance c, d;
  for (int i = 0; i < 10; ++i) (i < 5 ? c : d).add(i, 2.0 * i + 1);
  c.merge(d);
  // var(0..9) = 55/6; cov(x, 2x+1) = 2 var(x)
  CHECK(c.covariance() == doctest::Approx(2.0 * 55.0 / 6.0));
}

TEST_CASE("single sample has zero standard error") {
  const std::vector<double> one{4.2};
  const auto r = summarize(one);
  CHECK(r.mean == 4.2);
  CHECK(r.std_error == 0.0);
  CHECK(r.n_samples == 1);
}

TEST_CASE("accumulate is bitwise reproducible") {
  const auto v = sample_values(3 * kMergeChunk + 17);
  const auto a = accumulate(v), b = accumulate(v);
  CHECK(a.mean == b.mean);
  CHECK(a.m2 == b.m2);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("csv writer layout") {
  const auto path = std::filesystem::temp_directory_path() / "exitctl_csv_test.csv";
  {
    CsvWriter w(path);
    w.header({"a", "b", "c"});
    w << 0.5 << std::uint64_t{3} << std::string("x");
    w.end_row();
  }
  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "a,b,c");
  CHECK(l2 == "0.5,3,x");
  std::filesystem::remove(path);
}
