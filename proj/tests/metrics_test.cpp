#include <doctest.h>

#include <cmath>
#include <vector>

#include "titan/core/rng.hpp"
#include "titan/metrics/metrics.hpp"

using namespace titan;
using data::BBox;
using data::EgoState;

TEST_CASE("ade and fde on hand-computed offsets") {
  std::vector<BBox> truth = {{0.5, 0.5, 0.1, 0.1}, {0.5, 0.5, 0.1, 0.1}};
  std::vector<BBox> pred = truth;
  CHECK(metrics::ade(pred, truth) == 0.0);
  CHECK(metrics::fde(pred, truth) == 0.0);

  // Offsets (0,0) px then (3,4) px: ADE (0 + 5)/2, FDE 5.
  pred[1].c_u += 3.0 / 1920.0;
  pred[1].c_v += 4.0 / 1200.0;
  CHECK(metrics::ade(pred, truth) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(metrics::fde(pred, truth) == doctest::Approx(5.0).epsilon(1e-9));

  std::vector<BBox> single = {truth[0]};
  std::vector<BBox> single_pred = {pred[1]};
  CHECK(metrics::fde(single_pred, single) ==
        doctest::Approx(metrics::ade(single_pred, single)).epsilon(1e-12));

  CHECK_THROWS(metrics::ade(single, truth));
  CHECK_THROWS(metrics::fde(std::vector<BBox>{}, std::vector<BBox>{}));
}

TEST_CASE("ade and fde match a brute-force recomputation") {
  core::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.index(20);
    std::vector<BBox> pred(n), truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = {rng.uniform(), rng.uniform(), rng.uniform(0, 0.2), rng.uniform(0, 0.2)};
      truth[i] = {rng.uniform(), rng.uniform(), rng.uniform(0, 0.2), rng.uniform(0, 0.2)};
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double du = (pred[i].c_u - truth[i].c_u) * 1920.0;
      const double dv = (pred[i].c_v - truth[i].c_v) * 1200.0;
      sum += std::hypot(du, dv);
    }
    CHECK(std::abs(metrics::ade(pred, truth) - sum / n) < 1e-9);
    const double du = (pred[n - 1].c_u - truth[n - 1].c_u) * 1920.0;
    const double dv = (pred[n - 1].c_v - truth[n - 1].c_v) * 1200.0;
    CHECK(std::abs(metrics::fde(pred, truth) - std::hypot(du, dv)) < 1e-9);
  }
}

TEST_CASE("ade and fde ignore box dimensions") {
  core::Rng rng(32);
  std::vector<BBox> pred(5), truth(5);
  for (int i = 0; i < 5; ++i) {
    pred[i] = {rng.uniform(), rng.uniform(), 0.1, 0.1};
    truth[i] = {rng.uniform(), rng.uniform(), 0.1, 0.1};
  }
  const double a0 = metrics::ade(pred, truth);
  const double f0 = metrics::fde(pred, truth);
  for (auto& b : pred) {
    b.l_u = rng.uniform(0, 0.5);
    b.l_v = rng.uniform(0, 0.5);
  }
  CHECK(metrics::ade(pred, truth) == a0);
  CHECK(metrics::fde(pred, truth) == f0);
}

TEST_CASE("fiou fixtures") {
  BBox a{0.5, 0.5, 0.2, 0.2};
  CHECK(metrics::fiou(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  BBox far{0.1, 0.1, 0.05, 0.05};
  CHECK(metrics::fiou(a, far) == 0.0);

  // Unit squares offset by half a side: intersection 0.5, union 1.5.
  BBox u1{0.0, 0.0, 1.0, 1.0};
  BBox u2{0.5, 0.0, 1.0, 1.0};
  CHECK(metrics::fiou(u1, u2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Zero-area union.
  BBox empty1{0.3, 0.3, 0.0, 0.0};
  BBox empty2{0.4, 0.4, 0.0, 0.0};
  CHECK(metrics::fiou(empty1, empty2) == 0.0);

  core::Rng rng(33);
  for (int i = 0; i < 200; ++i) {
    BBox p{rng.uniform(), rng.uniform(), rng.uniform(0, 0.4), rng.uniform(0, 0.4)};
    BBox t{rng.uniform(), rng.uniform(), rng.uniform(0, 0.4), rng.uniform(0, 0.4)};
    const double v = metrics::fiou(p, t);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("ego rmse fixtures and brute-force agreement") {
  std::vector<EgoState> truth(20), pred(20);
  for (int i = 0; i < 20; ++i) truth[i] = {0.5, 0.1};
  pred = truth;
  auto r = metrics::ego_rmse(pred, truth);
  CHECK(r.alpha == 0.0);
  CHECK(r.omega == 0.0);

  for (auto& e : pred) e.alpha += 0.25;
  r = metrics::ego_rmse(pred, truth);
  CHECK(r.alpha == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.omega == 0.0);

  core::Rng rng(34);
  metrics::EgoRmseAccum accum;
  double se_a = 0.0, se_w = 0.0;
  size_t total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.index(25);
    std::vector<EgoState> p(n), t(n);
    for (int i = 0; i < n; ++i) {
      p[i] = {rng.uniform(-3, 3), rng.uniform(-0.5, 0.5)};
      t[i] = {rng.uniform(-3, 3), rng.uniform(-0.5, 0.5)};
      se_a += (p[i].alpha - t[i].alpha) * (p[i].alpha - t[i].alpha);
      se_w += (p[i].omega - t[i].omega) * (p[i].omega - t[i].omega);
    }
    total += n;
    accum.add(p, t);
    auto one = metrics::ego_rmse(p, t);
    double ref_a = 0.0, ref_w = 0.0;
    for (int i = 0; i < n; ++i) {
      ref_a += (p[i].alpha - t[i].alpha) * (p[i].alpha - t[i].alpha);
      ref_w += (p[i].omega - t[i].omega) * (p[i].omega - t[i].omega);
    }
    CHECK(std::abs(one.alpha - std::sqrt(ref_a / n)) < 1e-9);
    CHECK(std::abs(one.omega - std::sqrt(ref_w / n)) < 1e-9);
  }
  const auto agg = accum.value();
  CHECK(std::abs(agg.alpha - std::sqrt(se_a / total)) < 1e-9);
  CHECK(std::abs(agg.omega - std::sqrt(se_w / total)) < 1e-9);

  std::vector<EgoState> short_series(3);
  CHECK_THROWS(metrics::ego_rmse(short_series, truth));
}
