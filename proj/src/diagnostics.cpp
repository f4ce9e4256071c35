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

#include "distillir/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "distillir/errors.hpp"

namespace distillir::diagnostics {

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::kCdf: return "cdf";
    case CurveKind::kKde: return "kde";
    case CurveKind::kQq: return "qq";
  }
  return "unknown";
}

std::string to_string(DistanceMetric metric) {
  return metric == DistanceMetric::kEuclideanRaw ? "euclidean-raw" : "euclidean-feature";
}

Embedding raw_embedding(const Image& img) {
  const auto d = img.data();
  return {d.begin(), d.end()};
}

Embedding feature_embedding(const distill::AdjusterCNN& adjuster, const Image& img) {
  const distill::FeatureMap f = distill::extract_features(adjuster, img);
  const std::size_t hw = static_cast<std::size_t>(f.height) * f.width;
  Embedding out(f.channels);
  for (int c = 0; c < f.channels; ++c) {
    const double* p = f.data.data() + c * hw;
    out[c] = std::accumulate(p, p + hw, 0.0) / static_cast<double>(hw);
  }
  return out;
}

std::vector<double> pairwise_distances(const std::vector<Embedding>& embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw ValidationError("pairwise distances need at least 2 embeddings");
  const std::size_t dim = embeddings[0].size();
  for (const Embedding& e : embeddings) {
    if (e.size() != dim) throw ValidationError("embeddings differ in dimension");
  }
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = embeddings[i][k] - embeddings[j][k];
        s += d * d;
      }
      out.push_back(std::sqrt(s));
    }
  }
  return out;
}

CurveData pairwise_distance_cdf(const std::vector<Embedding>& embeddings, DistanceMetric metric) {
  std::vector<double> d = pairwise_distances(embeddings);
  std::sort(d.begin(), d.end());
  CurveData curve{CurveKind::kCdf, to_string(metric), {}, {}};
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i + 1 < d.size() && d[i + 1] == d[i]) continue;
    curve.points.push_back({d[i], static_cast<double>(i + 1) / n});
  }
  return curve;
}

bool is_valid_cdf(const CurveData& curve) {
  if (curve.points.empty() || curve.points.back().y != 1.0) return false;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const Point& p = curve.points[i];
    if (!(p.y >= 0.0 && p.y <= 1.0)) return false;
    if (i > 0 && (p.x <= curve.points[i - 1].x || p.y < curve.points[i - 1].y)) return false;
  }
  return true;
}

double silverman_bandwidth(const std::vector<double>& samples) {
  if (samples.empty()) throw ValidationError("bandwidth of an empty sample");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  if (!(spread > 0.0)) spread = 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

CurveData kde_1d(const std::vector<double>& samples, double bandwidth,
                 const std::vector<double>& grid) {
  if (samples.empty()) throw ValidationError("kde of an empty sample");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("kde bandwidth must be positive");
  }
  // Summing in sorted order makes the result independent of sample order.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  CurveData curve{CurveKind::kKde, "kde", {}, {}};
  curve.points.reserve(grid.size());
  for (double x : grid) {
    double s = 0.0;
    for (double v : sorted) {
      const double u = (x - v) / bandwidth;
      s += std::exp(-0.5 * u * u);
    }
    curve.points.push_back({x, s * norm});
  }
  return curve;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ValidationError("linspace count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
  out.back() = hi;
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile probability outside [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CurveData qq_points(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                    int q) {
  if (sample_a.empty() || sample_b.empty()) throw ValidationError("qq of an empty sample");
  if (q < 2) throw ValidationError("qq needs at least 2 quantiles");
  std::vector<double> a = sample_a, b = sample_b;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CurveData curve{CurveKind::kQq, "qq", {}, {}};
  for (int i = 0; i < q; ++i) {
    const double p = static_cast<double>(i) / (q - 1);
    curve.points.push_back({quantile_sorted(b, p), quantile_sorted(a, p)});
  }
  return curve;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValidationError("spearman needs two equal-length samples of size >= 2");
  }
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw ValidationError("spearman undefined for a constant sample");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace distillir::diagnostics
