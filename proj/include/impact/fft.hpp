#pragma once

#include "impact/core.hpp"

#include <complex>

namespace impact::fft {

Index next_pow2(Index n);

/// Real-to-complex forward transform of length `size` (zero padded). Returns
/// the half spectrum, size/2 + 1 bins.
Eigen::ArrayXcd forward(const Eigen::ArrayXd& x, Index size);

/// Inverse of `forward`; returns `size` real samples, scaled by 1/size.
Eigen::ArrayXd inverse(const Eigen::ArrayXcd& half_spectrum, Index size);

/// Sums S(l) = sum_n x[n+l] * x[n] for l = 0..max_lag.
Eigen::ArrayXd lagged_products(const Eigen::ArrayXd& x, Index max_lag);

/// Strictly causal convolution y[t] = sum_{k=1..min(L,t)} g[k-1] * w[t-k],
/// where L = g.size(). Output has w.size() samples.
Eigen::ArrayXd causal_convolve(const Eigen::ArrayXd& w, const Eigen::ArrayXd& g);

}  // namespace impact::fft
