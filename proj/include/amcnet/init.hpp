#pragma once

#include "amcnet/network.hpp"
#include "amcnet/rng.hpp"

namespace amcnet {

enum class InitScheme { gaussian, kaiming };

struct InitSpec {
  InitScheme scheme = InitScheme::gaussian;
  /// Standard deviation for the gaussian scheme.
  double sigma = 1e-2;
};

/// gaussian: every parameter ~ N(0, sigma^2).
/// kaiming: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) (the
/// PyTorch default for linear and recurrent layers); recurrent cells use the
/// hidden size as fan_in.
ParamVector init_params(const NetworkSpec& spec, const InitSpec& init, Rng& rng);

std::string to_string(InitScheme s);
InitScheme init_scheme_from_string(const std::string& s);

}  // namespace amcnet
