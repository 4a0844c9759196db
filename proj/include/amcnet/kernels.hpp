#pragma once

#include <span>

namespace amcnet {

/// Elementwise tanh in place.
///
/// Uses glibc's vector math library (libmvec, at most 4 ulp) when the build
/// found it, otherwise std::tanh. Every element goes through the same routine
/// regardless of its position in the span, so the result for a value does
/// not depend on how the batch was laid out.
void tanh_inplace(std::span<double> values);

/// Scalar tanh through the same routine as tanh_inplace.
double tanh_scalar(double v);

/// True when tanh_inplace is backed by libmvec.
bool vector_tanh_enabled();

}  // namespace amcnet
