#pragma once

// Element-wise and reduction kernels behind the loss, gradient and solver
// inner loops. Every kernel has a portable scalar reference; an AVX2/FMA
// variant is selected at runtime when the CPU supports it. Selection can be
// forced with the GS1MC_KERNELS environment variable ("scalar" or "avx2").

#include <cstddef>
#include <string_view>
#include <vector>

namespace gs1mc::kernels {

struct KernelTable {
  const char* name;

  // Masked logistic loss over n entries with positive/negative weights:
  //   returns sum_e pos_e * softplus(-m_e) + neg_e * softplus(m_e)
  // and, when grad != nullptr, writes grad_e = pos_e * (f(m_e) - 1) + neg_e * f(m_e).
  double (*masked_logistic)(const double* m, const double* pos, const double* neg, double* grad,
                            std::size_t n);

  // out_e = 1 / (1 + exp(-z_e)), stable for any finite z.
  void (*sigmoid)(const double* z, double* out, std::size_t n);

  double (*dot)(const double* x, const double* y, std::size_t n);

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// The table used by the library. Resolved once from the CPU and GS1MC_KERNELS.
const KernelTable& active() noexcept;

/// Overrides the active table ("scalar", "avx2" or "auto"). Returns false if unavailable.
bool select(std::string_view name);

/// Names of every table usable on this machine.
std::vector<std::string_view> available();

}  // namespace gs1mc::kernels
