# Copyright 2026 The distillir Authors
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the distillir C++ library.

Images are float64 numpy arrays of shape (H, W, C) with values in [0, 1].
"""

from ._distillir import (
    ConfigError,
    Error,
    IoError,
    ValidationError,
    degrade,
    feature_discrepancy,
    gradient_match_loss,
    kde_1d,
    pairwise_distance_cdf,
    pairwise_distances,
    psnr,
    qq_points,
    resize,
    run_pipeline,
    shannon_entropy,
    ssim,
    synth_pairs,
    top_p_indices,
)

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "ValidationError",
    "degrade",
    "feature_discrepancy",
    "gradient_match_loss",
    "kde_1d",
    "pairwise_distance_cdf",
    "pairwise_distances",
    "psnr",
    "qq_points",
    "resize",
    "run_pipeline",
    "shannon_entropy",
    "ssim",
    "synth_pairs",
    "top_p_indices",
]
