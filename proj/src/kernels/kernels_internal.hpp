#pragma once

#include "gs1mc/kernels.hpp"

namespace gs1mc::kernels::detail {

const KernelTable& scalar_impl() noexcept;
#if defined(GS1MC_HAVE_AVX2)
const KernelTable& avx2_impl() noexcept;
#endif

}  // namespace gs1mc::kernels::detail
