#include <cmath>

#include "bamboo/model.hpp"
#include "doctest.h"

using namespace bamboo::model;

TEST_CASE("p_conflict evaluations") {
  CHECK(p_conflict({16, 32, 1e6, 1}).value == doctest::Approx(4.096e-3).epsilon(1e-12));
  CHECK(p_conflict({16, 10, 1e8, 1}).value == doctest::Approx(1.28e-5).epsilon(1e-12));
  CHECK(p_conflict({16, 32, 1e15, 1}).value == doctest::Approx(0.0).epsilon(1e-9));
  auto c = p_conflict({100, 100, 10, 1});
  CHECK(c.value == 1.0);
  CHECK(c.clamped);
}

TEST_CASE("p_deadlock evaluations") {
  CHECK(p_deadlock({16, 32, 1e6, 1}).value == doctest::Approx(5.24288e-7).epsilon(1e-12));
  // K=1 reduces to N/(4D^2)
  CHECK(p_deadlock({1, 32, 1e3, 1}).value == doctest::Approx(32.0 / 4e6).epsilon(1e-12));
  CHECK(p_deadlock({16, 0, 1e6, 1}).value == 0.0);
}

TEST_CASE("benefit condition") {
  auto r = bamboo_benefit_holds({16, 32, 1e6, 1});
  CHECK(r.holds);
  CHECK(r.margin == doctest::Approx(15.0 / 17.0 - 3.3554432e-5).epsilon(1e-12));

  auto k1 = bamboo_benefit_holds({1, 32, 1e6, 1});
  CHECK(!k1.holds);
  CHECK(!k1.note.empty());

  // N = D with large K: lhs >> 1
  auto bad = bamboo_benefit_holds({64, 1e4, 1e4, 1});
  CHECK(!bad.holds);
  CHECK(bad.margin < 0);
}

TEST_CASE("throughput formula and presets") {
  auto t = throughput_proportional({16, 32, 1e6, 2.0}, 0, 0, 0, 0);
  CHECK(t.value == doctest::Approx(32.0 / (17.0 * 2.0)).epsilon(1e-12));
  CHECK(preset_a_bb({16, 1, 1, 1}) == doctest::Approx(1.0 / 17.0).epsilon(1e-12));
  CHECK(preset_a_ww({16, 1, 1, 1}) == 0.5);
  auto clamped = throughput_proportional({16, 32, 1e6, 1}, 1.0, 1.0, 1.0, 1.0);
  CHECK(clamped.value == 0.0);
  CHECK(clamped.clamped);
  CHECK_THROWS_AS(throughput_proportional({16, 32, 1e6, 1}, 2.0, 0, 0, 0),
                  std::invalid_argument);
}

TEST_CASE("monotonicity over a parameter grid") {
  double ns[] = {1, 8, 32, 128, 512};
  double ks[] = {1, 2, 8, 16, 64};
  double ds[] = {1e4, 1e5, 1e6, 1e7, 1e8};
  for (double n : ns) {
    for (double k : ks) {
      for (double d : ds) {
        ModelParams p{k, n, d, 1};
        // nondecreasing in N and K
        CHECK(p_conflict({k, n * 2, d, 1}).value >= p_conflict(p).value);
        CHECK(p_conflict({k * 2, n, d, 1}).value >= p_conflict(p).value);
        CHECK(p_deadlock({k, n * 2, d, 1}).value >= p_deadlock(p).value);
        CHECK(p_deadlock({k * 2, n, d, 1}).value >= p_deadlock(p).value);
        // nonincreasing in D
        CHECK(p_conflict({k, n, d * 10, 1}).value <= p_conflict(p).value);
        CHECK(p_deadlock({k, n, d * 10, 1}).value <= p_deadlock(p).value);
      }
    }
  }
}

TEST_CASE("benefit margin positive when D >= 100*N*K^2 and K >= 2") {
  double ns[] = {1, 8, 64, 512};
  double ks[] = {2, 4, 16, 64};
  for (double n : ns) {
    for (double k : ks) {
      double d = 100.0 * n * k * k;
      for (double scale : {1.0, 2.0, 10.0}) {
        auto r = bamboo_benefit_holds({k, n, d * scale, 1});
        CHECK(r.holds);
        CHECK(r.margin > 0);
      }
    }
  }
}
