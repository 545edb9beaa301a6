#pragma once

#include <vector>

#include "spillprobe/kernels.hpp"

namespace spillprobe::kernels::detail {

/// Normalized Gaussian over `window` taps centered at (window - 1) / 2.
std::vector<double> window_taps(int window, double sigma);
void check_ssim_inputs(const GrayBuf& a, const GrayBuf& b, const SsimParams& p);

}  // namespace spillprobe::kernels::detail
