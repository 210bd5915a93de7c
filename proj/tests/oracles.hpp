// tests/oracles.hpp

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

// Reference implementations used only by the tests. Each one computes the
// same quantity as a library routine by a deliberately naive route and
// shares no code with it.

#ifndef MSAM_TESTS_ORACLES_HPP_
#define MSAM_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "msam/model.hpp"

namespace msam::oracle {

using Mat = std::vector<std::vector<double>>;

/// maps[k][m] = b_k + sum_j w_k[j] * x[m*S + j], enumerating every window
/// explicitly.
inline Mat windowed_dot(const std::vector<double> &x, const Mat &kernels,
                        const std::vector<double> &bias, std::size_t stride) {
  const std::size_t L = kernels.at(0).size();
  Mat out(kernels.size());
  for (std::size_t start = 0; start + L <= x.size(); start += stride) {
    std::vector<double> window(x.begin() + static_cast<long>(start),
                               x.begin() + static_cast<long>(start + L));
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      double acc = bias[k];
      for (std::size_t j = 0; j < L; ++j) acc += window[j] * kernels[k][j];
      out[k].push_back(acc);
    }
  }
  return out;
}

/// Magnitudes of bins 0..n/2 of the n-point DFT of x zero-padded to n.
inline std::vector<double> dft_magnitude(const std::vector<double> &x, std::size_t n) {
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < x.size(); ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                                        static_cast<double>(n));
    mag[k] = std::abs(acc);
  }
  return mag;
}

/// Shortest contiguous run holding >= fraction of the energy, by trying
/// every (start, length) pair.
inline std::size_t effective_length_exhaustive(const std::vector<double> &w, double fraction) {
  double total = 0;
  for (double v : w) total += v * v;
  for (std::size_t len = 1; len <= w.size(); ++len)
    for (std::size_t s = 0; s + len <= w.size(); ++s) {
      double e = 0;
      for (std::size_t j = s; j < s + len; ++j) e += w[j] * w[j];
      if (e >= fraction * total) return len;
    }
  return w.size();
}

/// Layer-by-layer DNN evaluation with explicit nested-vector matrices.
inline std::vector<double> dense_forward(const std::vector<Mat> &weights,
                                         const std::vector<std::vector<double>> &biases,
                                         std::vector<double> x) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::vector<double> y(weights[l].size());
    for (std::size_t r = 0; r < y.size(); ++r) {
      y[r] = biases[l][r];
      for (std::size_t c = 0; c < x.size(); ++c) y[r] += weights[l][r][c] * x[c];
      if (l + 1 < weights.size()) y[r] = std::max(0.0, y[r]);
    }
    x = y;
  }
  double mx = *std::max_element(x.begin(), x.end()), z = 0;
  for (double &v : x) z += (v = std::exp(v - mx));
  for (double &v : x) v /= z;
  return x;
}

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst;  // "<tensor>[<index>]"
  std::size_t checked = 0;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries
/// whose true gradient is ~0 (dead ReLU units) from dividing roundoff by
/// zero.
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares every entry of `analytic` (aligned with model.params()) with a
/// central difference of `loss` using step h.
inline GradCheckResult central_difference_check(Model<double> &model,
                                                std::vector<ParamView<double>> analytic,
                                                const std::function<double()> &loss,
                                                double h = 1e-5) {
  GradCheckResult r;
  auto params = model.params();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].data.size(); ++i) {
      double &w = params[t].data[i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = rel_error(analytic[t].data[i], numeric);
      ++r.checked;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst = params[t].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

}  // namespace msam::oracle

#endif  // MSAM_TESTS_ORACLES_HPP_
