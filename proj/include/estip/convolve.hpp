#pragma once

// Discrete convolutions out[j] = sum_c g[c] * table[j + offset - c] on 1D
// grids, either linear (zero padded) or circular, through FFTW with a direct
// O(M^2) path kept alongside.

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "estip/error.hpp"

namespace estip {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanFree {
  void operator()(fftw_plan p) const noexcept { fftw_destroy_plan(p); }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanFree>;

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// Real-to-complex FFT of fixed length with owned buffers and plans.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        spec_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (n == 0) throw ConfigError("FFT length must be positive");
    forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.get(), spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_.get(), real_.get(), FFTW_ESTIMATE));
  }

  std::size_t size() const noexcept { return n_; }

  /// Spectrum of `x` zero-padded (or truncated) to the transform length.
  std::vector<std::complex<double>> forward(const std::vector<double>& x) {
    for (std::size_t i = 0; i < n_; ++i) real_.get()[i] = i < x.size() ? x[i] : 0.0;
    fftw_execute(forward_.get());
    std::vector<std::complex<double>> out(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
    return out;
  }

  /// Unnormalized inverse is divided by n, so backward(forward(x)) == x.
  std::vector<double> backward(const std::vector<std::complex<double>>& s) {
    for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
      spec_.get()[k][0] = s[k].real();
      spec_.get()[k][1] = s[k].imag();
    }
    fftw_execute(backward_.get());
    std::vector<double> out(n_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_.get()[i] * inv;
    return out;
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

/// Convolution of length-M grid data against a fixed kernel table.
///
/// Linear mode: table index t covers lags t - offset, and
/// out[j] = sum_c g[c] * table[j + offset - c] for j < outputs.
/// Circular mode: table has length M and out[j] = sum_c g[c] * table[(j - c) mod M].
class Convolver1d {
 public:
  Convolver1d(std::vector<double> table, std::size_t cells, std::size_t outputs, std::ptrdiff_t offset, bool circular)
      : table_(std::move(table)), cells_(cells), outputs_(outputs), offset_(offset), circular_(circular),
        fft_(circular ? cells : detail::next_pow2(cells + table_.size())) {
    if (circular && (table_.size() != cells || outputs != cells))
      throw ConfigError("circular convolution needs table and output length equal to the grid size");
    if (!circular && (offset < 0 || static_cast<std::size_t>(offset) + outputs > table_.size() + cells))
      throw ConfigError("convolution output window exceeds the full linear convolution");
    table_spectrum_ = fft_.forward(table_);
  }

  std::vector<double> apply(const std::vector<double>& g) {
    check(g);
    auto s = fft_.forward(g);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= table_spectrum_[k];
    const auto full = fft_.backward(s);
    std::vector<double> out(outputs_);
    for (std::size_t j = 0; j < outputs_; ++j) out[j] = full[j + (circular_ ? 0 : static_cast<std::size_t>(offset_))];
    return out;
  }

  std::vector<double> apply_direct(const std::vector<double>& g) const {
    check(g);
    std::vector<double> out(outputs_, 0.0);
    const auto m = static_cast<std::ptrdiff_t>(cells_);
    const auto tsize = static_cast<std::ptrdiff_t>(table_.size());
    for (std::size_t j = 0; j < outputs_; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t c = 0; c < m; ++c) {
        if (g[c] == 0.0) continue;
        std::ptrdiff_t t = circular_ ? ((static_cast<std::ptrdiff_t>(j) - c) % m + m) % m
                                     : static_cast<std::ptrdiff_t>(j) + offset_ - c;
        if (t < 0 || t >= tsize) continue;
        acc += g[c] * table_[t];
      }
      out[j] = acc;
    }
    return out;
  }

  std::size_t outputs() const noexcept { return outputs_; }

 private:
  void check(const std::vector<double>& g) const {
    if (g.size() != cells_) throw ConfigError("convolution input has the wrong length");
  }

  std::vector<double> table_;
  std::size_t cells_;
  std::size_t outputs_;
  std::ptrdiff_t offset_;
  bool circular_;
  RealFft fft_;
  std::vector<std::complex<double>> table_spectrum_;
};

}  // namespace estip
