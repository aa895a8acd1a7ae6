#include "impact/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace impact::fft {

Index next_pow2(Index n) {
  Index m = 1;
  while (m < n) m <<= 1;
  return m;
}

Eigen::ArrayXcd forward(const Eigen::ArrayXd& x, Index size) {
  require(size >= x.size(), "fft::forward: transform shorter than input");
  std::vector<double> in(static_cast<std::size_t>(size), 0.0);
  std::copy(x.data(), x.data() + x.size(), in.begin());
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> engine;
  engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  engine.fwd(out, in);
  return Eigen::Map<Eigen::ArrayXcd>(out.data(), static_cast<Index>(out.size()));
}

Eigen::ArrayXd inverse(const Eigen::ArrayXcd& half_spectrum, Index size) {
  require(half_spectrum.size() == size / 2 + 1, "fft::inverse: spectrum size mismatch");
  std::vector<std::complex<double>> in(half_spectrum.data(), half_spectrum.data() + half_spectrum.size());
  std::vector<double> out;
  Eigen::FFT<double> engine;
  engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  engine.inv(out, in, size);
  return Eigen::Map<Eigen::ArrayXd>(out.data(), static_cast<Index>(out.size()));
}

Eigen::ArrayXd lagged_products(const Eigen::ArrayXd& x, Index max_lag) {
  require(max_lag >= 0 && max_lag < x.size(), "lagged_products: max_lag out of range");
  const Index size = next_pow2(x.size() + max_lag + 1);
  const Eigen::ArrayXcd spec = forward(x, size);
  const Eigen::ArrayXd acf = inverse(spec.abs2().cast<std::complex<double>>(), size);
  return acf.head(max_lag + 1);
}

Eigen::ArrayXd causal_convolve(const Eigen::ArrayXd& w, const Eigen::ArrayXd& g) {
  const Index n = w.size();
  if (n == 0) return {};
  const Index taps = std::min<Index>(g.size(), n - 1);
  if (taps <= 0) return Eigen::ArrayXd::Zero(n);
  const Index size = next_pow2(n + taps + 1);
  Eigen::ArrayXd kernel = Eigen::ArrayXd::Zero(taps + 1);
  kernel.tail(taps) = g.head(taps);
  const Eigen::ArrayXcd prod = forward(w, size) * forward(kernel, size);
  return inverse(prod, size).head(n);
}

}  // namespace impact::fft
