#include <doctest.h>

#include <cmath>
#include <random>

#include "gs1mc/error.hpp"
#include "gs1mc/model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace gs1mc;

using fixture::Instance;
using fixture::random_instance;
using fixture::to_vec;

TEST_SUITE("model") {
  TEST_CASE("sigmoid reference points") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(sigmoid(3.7) + sigmoid(-3.7) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sigmoid(700.0) <= 1.0);
    CHECK(sigmoid(-700.0) > 0.0);
    CHECK_THROWS_AS(sigmoid(NAN), InvalidArgument);
    CHECK_THROWS_AS(sigmoid(INFINITY), InvalidArgument);
  }

  TEST_CASE("factor and group validation") {
    FactorSet f = FactorSet::zeros(3, 4, 2, 2, 2);
    CHECK_NOTHROW(f.validate());
    f.SU.resize(2, 3);
    f.SU.setZero();
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    f = FactorSet::zeros(3, 4, 2, 2, 2);
    f.Q(1, 1) = NAN;
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    CHECK_THROWS_AS(GroupAssignment({0, 2}, {0}, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(GroupAssignment({0, -1}, {0}, 2, 1), InvalidArgument);
    const auto single = GroupAssignment::single(3, 2);
    CHECK(single.m1() == 1);
    CHECK(to_vec(single.user_group()) == std::vector<int>{0, 0, 0});
  }

  TEST_CASE("indicators have one 1 per column and reproduce the expansion") {
    const Instance in = random_instance(7, 9, 3, 2, 2, 5);
    const Matrix IU = in.g.user_indicator(), IJ = in.g.item_indicator();
    CHECK(IU.rows() == 3);
    CHECK(IU.cols() == 7);
    for (Eigen::Index c = 0; c < IU.cols(); ++c) CHECK(IU.col(c).sum() == 1.0);
    for (Eigen::Index c = 0; c < IJ.cols(); ++c) CHECK(IJ.col(c).sum() == 1.0);
    CHECK((IU.transpose() * in.f.SU - expand_user_factors(in.f.SU, in.g)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((IJ.transpose() * in.f.TJ - expand_item_factors(in.f.TJ, in.g)).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("group expansion examples") {
    Matrix SU(2, 1);
    SU << 1.5, -2.0;
    const GroupAssignment g({0, 1, 0}, {0}, 2, 1);
    const Matrix S = expand_user_factors(SU, g);
    CHECK(S(0, 0) == 1.5);
    CHECK(S(1, 0) == -2.0);
    CHECK(S(2, 0) == 1.5);
    CHECK(expand_user_factors(Matrix::Zero(2, 3), g).isZero(0));
    const Matrix one = expand_user_factors(Matrix::Constant(1, 2, 4.0), GroupAssignment::single(5, 1));
    CHECK((one.array() == 4.0).all());
    // Row duplication on a random assignment.
    const Instance in = random_instance(12, 3, 3, 1, 4, 11);
    const Matrix R = expand_user_factors(in.f.SU, in.g);
    for (int u = 0; u < 12; ++u)
      for (int w = 0; w < 12; ++w)
        if (in.g.user_group()[u] == in.g.user_group()[w]) CHECK(R.row(u) == R.row(w));
  }

  TEST_CASE("assemble_M examples") {
    CHECK(assemble_M(FactorSet::zeros(3, 4, 1, 1, 2), GroupAssignment::single(3, 4)).isZero(0));
    FactorSet f = FactorSet::zeros(1, 1, 1, 1, 2);
    f.P << 1, 2;
    f.Q << 3, 4;
    CHECK(assemble_M(f, GroupAssignment::single(1, 1))(0, 0) == 11.0);
    FactorSet h = FactorSet::zeros(2, 1, 1, 1, 1);
    h.P << 1, 2;
    h.SU << 0.5;
    h.Q << 1;
    const Matrix M = assemble_M(h, GroupAssignment::single(2, 1));
    CHECK(M(0, 0) == 1.5);
    CHECK(M(1, 0) == 2.5);
  }

  TEST_CASE("assemble_M matches the per-entry oracle and has rank at most K") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const int K = 1 + static_cast<int>(seed % 4);
      const Instance in = random_instance(9, 13, 3, 4, K, seed);
      const Matrix M = assemble_M(in.f, in.g);
      const Matrix ref = oracle::assemble(in.f.P, in.f.Q, in.f.SU, in.f.TJ, to_vec(in.g.user_group()),
                                          to_vec(in.g.item_group()));
      const double scale = ref.cwiseAbs().maxCoeff();
      CHECK((M - ref).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(M).singularValues();
      for (Eigen::Index r = K; r < sv.size(); ++r) CHECK(sv[r] <= 1e-8 * sv[0]);
    }
  }

  TEST_CASE("permuting group ids with their factor rows leaves M unchanged") {
    const Instance in = random_instance(10, 8, 4, 3, 3, 21);
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> ug = to_vec(in.g.user_group());
    for (auto& v : ug) v = perm[v];
    Matrix SU(4, 3);
    for (int v = 0; v < 4; ++v) SU.row(perm[v]) = in.f.SU.row(v);
    FactorSet f = in.f;
    f.SU = SU;
    const GroupAssignment g(ug, to_vec(in.g.item_group()), 4, 3);
    CHECK(assemble_M(f, g) == assemble_M(in.f, in.g));
  }

  TEST_CASE("users with equal P rows and groups predict identically") {
    Instance in = random_instance(6, 7, 2, 2, 3, 8);
    std::vector<int> ug = to_vec(in.g.user_group());
    ug[4] = ug[1];
    in.g = GroupAssignment(ug, to_vec(in.g.item_group()), 2, 2);
    in.f.P.row(4) = in.f.P.row(1);
    const Matrix probs = predict_probabilities(assemble_M(in.f, in.g));
    CHECK(probs.row(4) == probs.row(1));
  }

  TEST_CASE("probabilities") {
    CHECK((predict_probabilities(Matrix::Zero(2, 3)).array() == 0.5).all());
    Matrix one(1, 1);
    one << std::log(3.0);
    CHECK(predict_probabilities(one)(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    std::mt19937_64 rng(4);
    const Matrix M = oracle::gaussian(3, 3, rng, 5.0);
    const Matrix p = predict_probabilities(M), q = predict_probabilities(-M);
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) {
        CHECK(p(r, c) == doctest::Approx(1.0 / (1.0 + std::exp(-M(r, c)))).epsilon(1e-14));
        CHECK(std::abs(p(r, c) + q(r, c) - 1.0) <= 1e-12);
      }
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 0) = NAN;
    CHECK_THROWS_AS(predict_probabilities(bad), InvalidArgument);
  }

  TEST_CASE("binarized predictions and the tie rule") {
    Matrix p(1, 3);
    p << 0.1, 0.9, 0.4;
    const SignMatrix s = binarize_predictions(p);
    CHECK(s(0, 0) == -1);
    CHECK(s(0, 1) == 1);
    CHECK(s(0, 2) == -1);
    Matrix t(1, 2);
    t << 0.5, 0.75;
    CHECK(binarize_predictions(t)(0, 0) == 1);
    CHECK(binarize_predictions(t)(0, 1) == 1);
    CHECK_THROWS_AS(binarize_predictions(t, 1.0), InvalidArgument);
    CHECK_THROWS_AS(binarize_predictions(t, 0.0), InvalidArgument);
  }

  TEST_CASE("binary ratings invariants") {
    CHECK_THROWS_AS(BinaryRatings(2, 2, {{0, 0, 1}, {0, 0, -1}}), InvalidArgument);
    CHECK_THROWS_AS(BinaryRatings(2, 2, {{0, 2, 1}}), InvalidArgument);
    CHECK_THROWS_AS(BinaryRatings(2, 2, {{0, 1, 0}}), InvalidArgument);
    const BinaryRatings r(2, 3, {{0, 0, 1}, {1, 2, -1}});
    const SignMatrix d = r.to_dense();
    CHECK(d(0, 0) == 1);
    CHECK(d(1, 2) == -1);
    CHECK(d(0, 1) == 0);
    CHECK(r.size() == 2);
  }
}
