#include "amcnet/init.hpp"

#include <cmath>

#include "amcnet/errors.hpp"

namespace amcnet {

ParamVector init_params(const NetworkSpec& spec, const InitSpec& init, Rng& rng) {
  ParamVector params(spec.param_count(), 0.0);
  switch (init.scheme) {
    case InitScheme::gaussian:
      if (!(init.sigma >= 0.0)) throw ConfigError("gaussian init needs sigma >= 0");
      for (double& p : params) p = init.sigma * rng.normal();
      break;
    case InitScheme::kaiming:
      for (const Block& b : spec.blocks()) {
        const std::size_t fan_in = b.recurrent ? b.fan_in - b.cell_input : b.fan_in;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        const std::size_t end = b.bias_offset + b.fan_out;
        for (std::size_t i = b.weight_offset; i < end; ++i) {
          params[i] = bound * (2.0 * rng.uniform() - 1.0);
        }
      }
      break;
  }
  return params;
}

std::string to_string(InitScheme s) { return s == InitScheme::gaussian ? "gaussian" : "kaiming"; }

InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "gaussian") return InitScheme::gaussian;
  if (s == "kaiming") return InitScheme::kaiming;
  throw ConfigError("unknown init scheme '" + s + "'");
}

}  // namespace amcnet
