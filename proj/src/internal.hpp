#pragma once

// Helpers shared by the forward and gradient code; not part of the public API.

#include <span>

#include "amcnet/forward.hpp"

namespace amcnet::detail {

/// Copy of columns [first_source, first_source + sources) of a block's
/// row-major weight matrix.
Matrix block_weights(const Block& b, std::span<const double> params, std::size_t first_source,
                     std::size_t sources);
Vector block_bias(const Block& b, std::span<const double> params);

/// sum_sq[i] += sum over columns of a(i, c)^2, in column order.
void accumulate_rows(const Matrix& a, std::span<double> sum_sq);
void check_finite(const Matrix& z, const char* where, std::size_t layer);
void tanh_matrix(Matrix& z);

}  // namespace amcnet::detail
