#pragma once

#include <random>
#include <span>
#include <vector>

#include "gs1mc/model.hpp"
#include "oracles.hpp"

namespace fixture {

struct Instance {
  gs1mc::FactorSet f;
  gs1mc::GroupAssignment g;
};

inline Instance random_instance(int n1, int n2, int m1, int m2, int K, std::uint64_t seed,
                                double sd = 1.0) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.f.P = oracle::gaussian(n1, K, rng, sd);
  in.f.Q = oracle::gaussian(n2, K, rng, sd);
  in.f.SU = oracle::gaussian(m1, K, rng, sd);
  in.f.TJ = oracle::gaussian(m2, K, rng, sd);
  std::vector<int> ug(static_cast<std::size_t>(n1)), ig(static_cast<std::size_t>(n2));
  for (auto& v : ug) v = std::uniform_int_distribution<int>(0, m1 - 1)(rng);
  for (auto& v : ig) v = std::uniform_int_distribution<int>(0, m2 - 1)(rng);
  in.g = gs1mc::GroupAssignment(ug, ig, m1, m2);
  return in;
}

/// Each entry observed with probability `density`, sign uniform.
inline gs1mc::BinaryRatings random_ratings(int n1, int n2, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<gs1mc::Rating> e;
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b)
      if (u(rng) < density) e.push_back({a, b, u(rng) < 0.5 ? 1 : -1});
  return gs1mc::BinaryRatings(n1, n2, std::move(e));
}

/// +1 / -1 / 0 grid for the oracles.
inline std::vector<std::vector<int>> sign_grid(const gs1mc::BinaryRatings& r) {
  std::vector<std::vector<int>> y(static_cast<std::size_t>(r.n1()), std::vector<int>(static_cast<std::size_t>(r.n2()), 0));
  for (const auto& e : r.entries()) y[e.user][e.item] = e.y;
  return y;
}

inline std::vector<int> to_vec(std::span<const int> s) { return {s.begin(), s.end()}; }

}  // namespace fixture
