#include "amcnet/kernels.hpp"

#include <cmath>
#include <cstddef>

#if defined(AMCNET_LIBMVEC_AVX512)
#include <immintrin.h>
extern "C" __m512d _ZGVeN8v_tanh(__m512d);
#endif

namespace amcnet {

#if defined(AMCNET_LIBMVEC_AVX512)

void tanh_inplace(std::span<double> values) {
  const std::size_t n = values.size();
  double* p = values.data();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm512_storeu_pd(p + i, _ZGVeN8v_tanh(_mm512_loadu_pd(p + i)));
  }
  if (i < n) {
    const __mmask8 mask = static_cast<__mmask8>((1u << (n - i)) - 1u);
    const __m512d tail = _mm512_maskz_loadu_pd(mask, p + i);
    _mm512_mask_storeu_pd(p + i, mask, _ZGVeN8v_tanh(tail));
  }
}

double tanh_scalar(double v) {
  double buf[1] = {v};
  tanh_inplace(buf);
  return buf[0];
}

bool vector_tanh_enabled() { return true; }

#else

void tanh_inplace(std::span<double> values) {
  for (double& v : values) v = std::tanh(v);
}

double tanh_scalar(double v) { return std::tanh(v); }

bool vector_tanh_enabled() { return false; }

#endif

}  // namespace amcnet
