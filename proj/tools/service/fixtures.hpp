#pragma once

#include <cstdint>
#include <string>

#include "tda/table.hpp"

namespace tda::service {

/// Two bumps in the unit square: centers (0.25, 0.5) and (0.75, 0.5),
/// amplitudes 1.0 and 0.6, widths 0.1.
GaussianMixture two_gaussians();

/// Four bumps on corners of the 5D cube (coordinates 0.1 / 0.9) with
/// amplitudes 1.0, 0.8, 0.6, 0.4; f between centers is close to 0.
GaussianMixture four_gaussians_5d();

/// Mixture preset by name: "two-gaussians" or "four-gaussians-5d".
GaussianMixture mixture_preset(const std::string& name);

}  // namespace tda::service
