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

#pragma once

#include <string>
#include <vector>

#include "distillir/adjuster.hpp"
#include "distillir/image.hpp"

namespace distillir::diagnostics {

enum class CurveKind { kCdf, kKde, kQq };

std::string to_string(CurveKind kind);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct CurveData {
  CurveKind kind = CurveKind::kCdf;
  std::string metric;                // e.g. "ped/subset", "kde/entropy"
  std::vector<Point> points;         // ordered by x (cdf, kde) or quantile (qq)
  std::vector<std::string> sources;  // run ids the data came from
};

enum class DistanceMetric { kEuclideanRaw, kEuclideanFeature };

std::string to_string(DistanceMetric metric);

using Embedding = std::vector<double>;

// Flattened pixel values (raw-space distances).
Embedding raw_embedding(const Image& img);
// Per-channel mean of the adjuster's feature layer (feature-space distances).
Embedding feature_embedding(const distill::AdjusterCNN& adjuster, const Image& img);

// All n(n-1)/2 Euclidean distances, pairs (i, j) with i < j in row-major
// order. Throws ValidationError on fewer than 2 embeddings or a dimension
// mismatch.
std::vector<double> pairwise_distances(const std::vector<Embedding>& embeddings);

// Empirical CDF of the pairwise distances: one point per distinct distance
// d with y = #{distances <= d} / count. The last point has y = 1.
CurveData pairwise_distance_cdf(const std::vector<Embedding>& embeddings, DistanceMetric metric);

// Non-decreasing y in [0, 1] ending exactly at 1, strictly increasing x.
bool is_valid_cdf(const CurveData& curve);

// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to whichever spread is
// positive, and to 1 for a constant sample.
double silverman_bandwidth(const std::vector<double>& samples);

// Gaussian kernel density on `grid`. Throws ValidationError for an empty
// sample or non-positive bandwidth.
CurveData kde_1d(const std::vector<double>& samples, double bandwidth,
                 const std::vector<double>& grid);

std::vector<double> linspace(double lo, double hi, int count);

// Quantile of a sorted sample with linear interpolation between order
// statistics at position p * (n - 1).
double quantile_sorted(const std::vector<double>& sorted, double p);

// q points (Q_b(p_i), Q_a(p_i)) with p_i = i / (q - 1).
CurveData qq_points(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                    int q);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace distillir::diagnostics
