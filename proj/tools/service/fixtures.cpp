#include "fixtures.hpp"

#include "tda/error.hpp"

namespace tda::service {

GaussianMixture two_gaussians() {
  return {{{0.25, 0.5}, {0.75, 0.5}}, {1.0, 0.6}, {0.1, 0.1}};
}

GaussianMixture four_gaussians_5d() {
  const double lo = 0.1, hi = 0.9;
  return {{{lo, lo, lo, lo, lo}, {hi, hi, lo, hi, hi}, {hi, hi, hi, lo, lo}, {lo, lo, hi, hi, hi}},
          {1.0, 0.8, 0.6, 0.4},
          {0.28, 0.32, 0.32, 0.30}};
}

GaussianMixture mixture_preset(const std::string& name) {
  if (name == "two-gaussians") return two_gaussians();
  if (name == "four-gaussians-5d") return four_gaussians_5d();
  throw Error(ErrorCode::config, "unknown mixture preset '" + name + "'");
}

}  // namespace tda::service
