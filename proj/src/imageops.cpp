// Copyright 2026 The distillir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "distillir/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "distillir/errors.hpp"
#include "distillir/rng.hpp"

namespace distillir::imageops {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> resample_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, src - lo};
  }
  return taps;
}

// 'valid' separable Gaussian filter of a single-channel plane.
std::vector<double> gaussian_valid(const std::vector<double>& plane, int h,
                                   int w, const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int oh = h - k + 1;
  const int ow = w - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += kernel[t] * plane[y * w + x + t];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += kernel[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

void require_same_shape(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ValidationError(std::string(op) + ": image shapes differ");
  }
}

}  // namespace

Image bilinear_resize(const Image& img, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1) {
    throw ValidationError("bilinear_resize: target dimensions must be >= 1");
  }
  if (img.empty()) throw ValidationError("bilinear_resize: empty image");
  if (out_height == img.height() && out_width == img.width()) return img;

  const auto ty = resample_taps(img.height(), out_height);
  const auto tx = resample_taps(img.width(), out_width);
  const int c = img.channels();
  Image out(out_height, out_width, c);
  for (int y = 0; y < out_height; ++y) {
    const Tap& a = ty[y];
    for (int x = 0; x < out_width; ++x) {
      const Tap& b = tx[x];
      for (int ch = 0; ch < c; ++ch) {
        const double top = img.at(a.lo, b.lo, ch) +
                           b.frac * (img.at(a.lo, b.hi, ch) - img.at(a.lo, b.lo, ch));
        const double bot = img.at(a.hi, b.lo, ch) +
                           b.frac * (img.at(a.hi, b.hi, ch) - img.at(a.hi, b.lo, ch));
        out.at(y, x, ch) = top + a.frac * (bot - top);
      }
    }
  }
  return out;
}

Image luminance(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.height(), img.width(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  }
  return out;
}

std::array<std::uint64_t, 256> luminance_histogram(const Image& img) {
  std::array<std::uint64_t, 256> hist{};
  const Image y = luminance(img);
  for (double v : y.data()) ++hist[to_u8(v)];
  return hist;
}

double shannon_entropy(const Image& img) {
  const auto hist = luminance_histogram(img);
  const double n = static_cast<double>(img.height()) * img.width();
  if (n == 0.0) return 0.0;
  double h = 0.0;
  for (std::uint64_t count : hist) {
    if (count == 0) continue;
    const double p = count / n;
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

std::vector<double> min_max_normalize(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("min_max_normalize: empty input");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(scores.size(), 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::clamp((scores[i] - min) / range, 0.0, 1.0);
  }
  return out;
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) throw ValidationError("mse: empty images");
  double s = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    s += d * d;
  }
  return s / static_cast<double>(da.size());
}

double psnr(const Image& a, const Image& b, double peak) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw ValidationError("ssim: image smaller than the 11x11 window");
  }
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  const int h = a.height();
  const int w = a.width();
  const Image ya = luminance(a);
  const Image yb = luminance(b);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> x(ya.data().begin(), ya.data().end());
  std::vector<double> y(yb.data().begin(), yb.data().end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = gaussian_kernel(kSsimWindow, kSsimSigma);
  const auto mx = gaussian_valid(x, h, w, k);
  const auto my = gaussian_valid(y, h, w, k);
  const auto sxx = gaussian_valid(xx, h, w, k);
  const auto syy = gaussian_valid(yy, h, w, k);
  const auto sxy = gaussian_valid(xy, h, w, k);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

QualityScore quality(const Image& restored, const Image& reference) {
  return {psnr(restored, reference), ssim(restored, reference)};
}

Image crop(const Image& img, int y, int x, int height, int width) {
  if (y < 0 || x < 0 || height < 1 || width < 1 || y + height > img.height() ||
      x + width > img.width()) {
    throw ValidationError("crop: window outside image");
  }
  Image out(height, width, img.channels());
  const int c = img.channels();
  for (int r = 0; r < height; ++r) {
    const auto src = img.data().subspan(
        (static_cast<std::size_t>(y + r) * img.width() + x) * c,
        static_cast<std::size_t>(width) * c);
    std::copy(src.begin(), src.end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(r) * width * c);
  }
  return out;
}

std::vector<Image> crop_patches(const Image& img, int size, int count,
                                std::uint64_t seed) {
  if (size < 1 || size > std::min(img.height(), img.width())) {
    throw ValidationError("crop_patches: patch size exceeds image");
  }
  if (count < 0) throw ValidationError("crop_patches: negative count");
  Rng rng(seed);
  std::uniform_int_distribution<int> dy(0, img.height() - size);
  std::uniform_int_distribution<int> dx(0, img.width() - size);
  std::vector<Image> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int y = dy(rng);
    const int x = dx(rng);
    out.push_back(crop(img, y, x, size, size));
  }
  return out;
}

}  // namespace distillir::imageops
