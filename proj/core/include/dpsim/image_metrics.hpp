// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dpsim/image.hpp"

namespace dpsim {

/// 10 log10(1 / MSE), 99 dB when MSE < 1e-10. Peak value 1.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over the valid region of an 11-tap Gaussian window
/// (sigma 1.5, K1 0.01, K2 0.03, range 1), averaged over channels.
/// Both sides must be at least 11 pixels.
double ssim(const Image& a, const Image& b);

}  // namespace dpsim
