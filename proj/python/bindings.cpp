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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "distillir/corpus.hpp"
#include "distillir/diagnostics.hpp"
#include "distillir/distill.hpp"
#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/pipeline.hpp"
#include "distillir/scorer.hpp"

namespace py = pybind11;
using namespace distillir;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// HxW or HxWxC float array -> Image.
Image to_image(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw ValidationError("expected an HxW or HxWxC array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  return Image::from_data(h, w, c, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Image& img) {
  Array out({img.height(), img.width(), img.channels()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

py::list points(const diagnostics::CurveData& c) {
  py::list out;
  for (const auto& p : c.points) out.append(py::make_tuple(p.x, p.y));
  return out;
}

}  // namespace

PYBIND11_MODULE(_distillir, m) {
  m.doc() = "Entropy-guided dataset distillation for image restoration";

  // Translators are tried newest first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<IoError>(m, "IoError", base);

  m.def("shannon_entropy", [](const Array& a) { return imageops::shannon_entropy(to_image(a)); },
        "Luminance histogram entropy in bits.");
  m.def("psnr", [](const Array& a, const Array& b) { return imageops::psnr(to_image(a), to_image(b)); });
  m.def("ssim", [](const Array& a, const Array& b) { return imageops::ssim(to_image(a), to_image(b)); });
  m.def("resize",
        [](const Array& a, int height, int width) {
          return to_array(imageops::bilinear_resize(to_image(a), height, width));
        },
        py::arg("image"), py::arg("height"), py::arg("width"));

  m.def("degrade",
        [](const Array& a, const std::string& tag, std::uint64_t seed) {
          return to_array(corpus::degrade(to_image(a), corpus::DegradationSpec::parse(tag), seed));
        },
        py::arg("image"), py::arg("degradation"), py::arg("seed"));

  m.def("synth_pairs",
        [](std::size_t count, int size, std::uint64_t seed, const std::vector<std::string>& mix) {
          corpus::SynthOptions o;
          for (const auto& tag : mix) {
            o.mix.push_back({corpus::DegradationSpec::parse(tag), 1.0 / static_cast<double>(mix.size())});
          }
          o.count = count;
          o.height = size;
          o.width = size;
          o.seed = seed;
          py::list out;
          for (const auto& p : corpus::synth_pairs(o)) {
            out.append(py::make_tuple(p.id, to_array(p.lq), to_array(p.hq), p.degradation.to_string()));
          }
          return out;
        },
        py::arg("count"), py::arg("size") = 64, py::arg("seed") = 0,
        py::arg("mix") = std::vector<std::string>{"noise{sigma=25}", "rain{density=25000,angle=15}"},
        "List of (id, lq, hq, degradation) with images as HxWx3 arrays.");

  m.def("top_p_indices",
        [](const std::vector<double>& scores, double p) { return scorer::top_p_indices(scores, p); },
        py::arg("scores"), py::arg("p"), "Indices of the top-p scores, highest first.");

  m.def("gradient_match_loss",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return distill::gradient_match_loss(a, b);
        });
  m.def("feature_discrepancy",
        [](const Array& a, const Array& b, const std::string& mode) {
          // CHW feature maps.
          if (a.ndim() != 3 || b.ndim() != 3) throw ValidationError("expected CxHxW arrays");
          auto map = [](const Array& x) {
            return distill::FeatureMap{static_cast<int>(x.shape(0)), static_cast<int>(x.shape(1)),
                                       static_cast<int>(x.shape(2)),
                                       std::vector<double>(x.data(), x.data() + x.size())};
          };
          return distill::distribution_discrepancy(map(a), map(b), distill::parse_mode(mode));
        },
        py::arg("a"), py::arg("b"), py::arg("mode") = "kl");

  m.def("pairwise_distances", &diagnostics::pairwise_distances);
  m.def("pairwise_distance_cdf", [](const std::vector<diagnostics::Embedding>& e) {
    return points(diagnostics::pairwise_distance_cdf(e, diagnostics::DistanceMetric::kEuclideanRaw));
  });
  m.def("kde_1d",
        [](const std::vector<double>& samples, double bandwidth, const std::vector<double>& grid) {
          return points(diagnostics::kde_1d(samples, bandwidth, grid));
        });
  m.def("qq_points", [](const std::vector<double>& a, const std::vector<double>& b, int q) {
    return points(diagnostics::qq_points(a, b, q));
  });

  m.def("run_pipeline",
        [](const std::filesystem::path& config, const std::vector<std::string>& overrides,
           const std::string& until) {
          const auto cfg = pipeline::load_config(config, overrides);
          pipeline::PipelineResult r;
          {
            py::gil_scoped_release release;
            r = pipeline::run_pipeline(cfg, pipeline::parse_stage(until));
          }
          py::dict out;
          out["run_id"] = r.run_id;
          out["report_dir"] = r.report_dir.string();
          out["mean_psnr"] = r.eval.mean_psnr;
          out["mean_ssim"] = r.eval.mean_ssim;
          py::list stages;
          for (const auto& s : r.stages) stages.append(pipeline::to_string(s.stage));
          out["stages"] = stages;
          return out;
        },
        py::arg("config") = std::filesystem::path{}, py::arg("overrides") = std::vector<std::string>{},
        py::arg("until") = "report");
}
