// msam/fft.hpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MSAM_FFT_HPP_
#define MSAM_FFT_HPP_

#include <fftw3.h>

#include <cmath>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "msam/error.hpp"

namespace msam {

namespace detail {
// The FFTW planner is not thread-safe; execution is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-input DFT of fixed length returning the magnitudes of the
/// n/2 + 1 non-negative frequency bins. Inputs shorter than n are
/// zero-padded.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 1) throw ValidationError("fft size must be >= 1");
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::size_t size() const { return n_; }
  std::size_t num_bins() const { return n_ / 2 + 1; }

  template <typename T>
  void magnitude(std::span<const T> x, std::span<double> out) {
    if (x.size() > n_) throw ValidationError("fft input longer than fft size");
    if (out.size() != num_bins()) throw ShapeError("fft output has wrong length");
    for (std::size_t i = 0; i < n_; ++i)
      in_[i] = i < x.size() ? static_cast<double>(x[i]) : 0.0;
    fftw_execute(plan_);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  std::size_t n_;
  double *in_ = nullptr;
  fftw_complex *out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace msam

#endif  // MSAM_FFT_HPP_
