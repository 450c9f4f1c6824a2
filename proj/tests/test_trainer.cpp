#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"
#include "gs1mc/trainer.hpp"

using namespace gs1mc;

TEST_SUITE("trainer") {
  TEST_CASE("zero outer iterations return the initialization") {
    const auto r = fixture::random_ratings(6, 7, 0.5, 1);
    TrainConfig cfg;
    cfg.max_outer_iters = 0;
    cfg.K = 2;
    const auto g = GroupAssignment::single(6, 7);
    const FitResult fit = fit_gs1mc(r, g, cfg);
    CHECK(fit.loss_trace.size() == 1);
    CHECK(fit.iterations_run == 0);
    CHECK(fit.factors == random_factors(6, 7, 1, 1, cfg));
  }

  TEST_CASE("rank-one sign pattern is fitted without training errors") {
    const double a[4] = {1.0, -2.0, 0.5, 3.0};
    const double b[4] = {-1.5, 0.7, 2.0, -0.2};
    std::vector<Rating> e;
    for (int u = 0; u < 4; ++u)
      for (int i = 0; i < 4; ++i) e.push_back({u, i, a[u] * b[i] > 0 ? 1 : -1});
    const BinaryRatings r(4, 4, e);
    TrainConfig cfg;
    cfg.K = 2;
    cfg.lambda = 1e-4;
    cfg.tolerance = 1e-12;
    cfg.max_outer_iters = 3000;
    cfg.init_scale = 0.5;
    const auto g = GroupAssignment::single(4, 4);
    const FitResult fit = fit_gs1mc(r, g, cfg);
    const Matrix probs = predict_missing(fit, g);
    int wrong = 0;
    for (const auto& x : e) wrong += (probs(x.user, x.item) >= 0.5 ? 1 : -1) != x.y;
    CHECK(wrong == 0);
  }

  TEST_CASE("loss trace is non-increasing and runs are deterministic") {
    const auto in = fixture::random_instance(30, 40, 3, 4, 3, 7);
    const auto r = fixture::random_ratings(30, 40, 0.3, 8);
    for (bool pre : {true, false}) {
      TrainConfig cfg;
      cfg.lambda = 0.5;
      cfg.max_outer_iters = 60;
      cfg.precondition = pre;
      cfg.seed = 3;
      const FitResult a = fit_gs1mc(r, in.g, cfg);
      const FitResult b = fit_gs1mc(r, in.g, cfg);
      CHECK(a.loss_trace == b.loss_trace);
      CHECK(a.factors == b.factors);
      for (std::size_t t = 1; t < a.loss_trace.size(); ++t)
        CHECK(a.loss_trace[t] <= a.loss_trace[t - 1] + 1e-9);
      CHECK(a.loss_trace.back() < a.loss_trace.front());
    }
  }

  TEST_CASE("every block step is monotone") {
    const auto in = fixture::random_instance(12, 15, 2, 3, 2, 4);
    const auto r = fixture::random_ratings(12, 15, 0.5, 5);
    BlockDescent d(r, in.g, 2.0);
    FactorSet f = in.f;
    double prev = d.loss(f);
    for (int rep = 0; rep < 10; ++rep)
      for (Block blk : {Block::P, Block::SU, Block::Q, Block::TJ}) {
        const double now = d.step_block(f, blk, 1);
        CHECK(now <= prev + 1e-9);
        CHECK(now == doctest::Approx(d.loss(f)).epsilon(1e-12));
        prev = now;
      }
  }

  TEST_CASE("ridge pull without observations shrinks P") {
    const auto in = fixture::random_instance(5, 6, 2, 2, 3, 9);
    BlockDescent d(BinaryRatings(5, 6, {}), in.g, 1.0);
    FactorSet f = in.f;
    const double before = f.P.norm();
    d.step_block(f, Block::P, 1);
    CHECK(f.P.norm() < before);
    CHECK(f.Q == in.f.Q);
  }

  TEST_CASE("error paths") {
    TrainConfig cfg;
    const auto g = GroupAssignment::single(3, 3);
    CHECK_THROWS_AS(fit_gs1mc(BinaryRatings(3, 3, {}), g, cfg), DataError);
    FactorSet huge = FactorSet::zeros(3, 3, 1, 1, cfg.K);
    huge.P.setConstant(1e200);
    huge.Q.setConstant(1e200);
    CHECK_THROWS_AS(fit_gs1mc(BinaryRatings(3, 3, {{0, 0, 1}}), g, cfg, huge), NumericalError);
    TrainConfig bad = cfg;
    bad.tolerance = 1.5;
    CHECK_THROWS_AS(fit_gs1mc(BinaryRatings(3, 3, {{0, 0, 1}}), g, bad), InvalidArgument);
    bad = cfg;
    bad.lambda = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  TEST_CASE("predict_missing composes assembly and sigmoid") {
    const auto in = fixture::random_instance(4, 6, 2, 2, 2, 2);
    FitResult fit;
    fit.factors = in.f;
    CHECK(predict_missing(fit, in.g) == predict_probabilities(assemble_M(in.f, in.g)));
    fit.factors = FactorSet::zeros(4, 6, 2, 2, 2);
    CHECK((predict_missing(fit, in.g).array() == 0.5).all());
  }

  TEST_CASE("scalar and avx2 kernels produce the same fit up to rounding") {
    if (!kernels::avx2_table()) return;
    const auto in = fixture::random_instance(40, 50, 3, 3, 3, 6);
    const auto r = fixture::random_ratings(40, 50, 0.3, 7);
    TrainConfig cfg;
    cfg.lambda = 1.0;
    cfg.max_outer_iters = 20;
    REQUIRE(kernels::select("scalar"));
    const FitResult s = fit_gs1mc(r, in.g, cfg);
    REQUIRE(kernels::select("avx2"));
    const FitResult v = fit_gs1mc(r, in.g, cfg);
    kernels::select("auto");
    REQUIRE(s.loss_trace.size() == v.loss_trace.size());
    for (std::size_t t = 0; t < s.loss_trace.size(); ++t)
      CHECK(v.loss_trace[t] == doctest::Approx(s.loss_trace[t]).epsilon(1e-9));
  }
}
