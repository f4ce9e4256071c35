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

#include "distillir/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>

#include "distillir/errors.hpp"

namespace distillir::nn {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require(bool cond, const char* msg) {
  if (!cond) throw ValidationError(msg);
}

bool any_grad(Graph& g, std::initializer_list<Var> vars) {
  for (Var v : vars) {
    if (g.requires_grad(v)) return true;
  }
  return false;
}

// Unfold x [N, C, H, W] into cols [C*k*k, N*H*W] with zero padding.
void im2col(const Tensor& x, int k, RowMat& cols) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  cols.resize(static_cast<Eigen::Index>(c) * k * k,
              static_cast<Eigen::Index>(n * hw));
  const float* src = x.data();
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = cols.data() + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * n * hw;
        const int dy = ky - pad, dx = kx - pad;
        for (int b = 0; b < n; ++b) {
          const float* plane = src + (static_cast<std::size_t>(b) * c + ch) * hw;
          float* out = row + b * hw;
          for (int y = 0; y < h; ++y) {
            const int sy = y + dy;
            float* orow = out + static_cast<std::size_t>(y) * w;
            if (sy < 0 || sy >= h) {
              std::fill(orow, orow + w, 0.0f);
              continue;
            }
            const float* srow = plane + static_cast<std::size_t>(sy) * w;
            const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
            std::fill(orow, orow + x0, 0.0f);
            std::copy(srow + x0 + dx, srow + x1 + dx, orow + x0);
            std::fill(orow + x1, orow + w, 0.0f);
          }
        }
      }
    }
  }
}

void col2im(const RowMat& cols, int k, Tensor& dx) {
  const int n = dx.dim(0), c = dx.dim(1), h = dx.dim(2), w = dx.dim(3);
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  float* dst = dx.data();
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = cols.data() + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * n * hw;
        const int dy = ky - pad, ddx = kx - pad;
        for (int b = 0; b < n; ++b) {
          float* plane = dst + (static_cast<std::size_t>(b) * c + ch) * hw;
          const float* in = row + b * hw;
          for (int y = 0; y < h; ++y) {
            const int sy = y + dy;
            if (sy < 0 || sy >= h) continue;
            const float* irow = in + static_cast<std::size_t>(y) * w;
            float* prow = plane + static_cast<std::size_t>(sy) * w;
            const int x0 = std::max(0, -ddx), x1 = std::min(w, w - ddx);
            for (int xx = x0; xx < x1; ++xx) prow[xx + ddx] += irow[xx];
          }
        }
      }
    }
  }
}

Tensor scalar_like(float v) { return Tensor::from({1}, {v}); }

}  // namespace

Var conv2d(Graph& g, Var xv, Var wv, Var bv) {
  const Tensor& x = g.value(xv);
  const Tensor& w = g.value(wv);
  const Tensor& b = g.value(bv);
  require(x.rank() == 4 && w.rank() == 4, "conv2d: expected 4-D input and weight");
  require(w.dim(1) == x.dim(1), "conv2d: channel mismatch");
  require(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1, "conv2d: kernel must be odd and square");
  require(b.numel() == static_cast<std::size_t>(w.dim(0)), "conv2d: bias size mismatch");
  const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
  const int o = w.dim(0), k = w.dim(2);
  const std::size_t hw = static_cast<std::size_t>(h) * wd;

  auto cols = std::make_shared<RowMat>();
  im2col(x, k, *cols);
  ConstMapMat wm(w.data(), o, static_cast<Eigen::Index>(w.numel() / o));
  RowMat out_mat = wm * (*cols);

  Tensor out({n, o, h, wd});
  for (int bi = 0; bi < n; ++bi) {
    for (int oc = 0; oc < o; ++oc) {
      const float* src = out_mat.data() + static_cast<std::size_t>(oc) * n * hw + bi * hw;
      float* dst = out.data() + (static_cast<std::size_t>(bi) * o + oc) * hw;
      const float bias = b[oc];
      for (std::size_t i = 0; i < hw; ++i) dst[i] = src[i] + bias;
    }
  }
  const bool need = any_grad(g, {xv, wv, bv});
  if (!need) cols.reset();
  return g.record(std::move(out), need, [=](Graph& gr, const Tensor& gout) {
    RowMat gmat(o, static_cast<Eigen::Index>(n * hw));
    for (int bi = 0; bi < n; ++bi) {
      for (int oc = 0; oc < o; ++oc) {
        const float* src = gout.data() + (static_cast<std::size_t>(bi) * o + oc) * hw;
        std::copy(src, src + hw, gmat.data() + static_cast<std::size_t>(oc) * n * hw + bi * hw);
      }
    }
    const Tensor& wt = gr.value(wv);
    if (gr.requires_grad(wv)) {
      Tensor& gw = gr.grad_buffer(wv);
      MapMat gwm(gw.data(), o, static_cast<Eigen::Index>(gw.numel() / o));
      gwm.noalias() += gmat * cols->transpose();
    }
    if (gr.requires_grad(bv)) {
      Tensor& gb = gr.grad_buffer(bv);
      for (int oc = 0; oc < o; ++oc) gb[oc] += gmat.row(oc).sum();
    }
    if (gr.requires_grad(xv)) {
      ConstMapMat wm2(wt.data(), o, static_cast<Eigen::Index>(wt.numel() / o));
      RowMat dcols = wm2.transpose() * gmat;
      col2im(dcols, k, gr.grad_buffer(xv));
    }
  });
}

Var avg_pool2(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 4 && x.dim(2) % 2 == 0 && x.dim(3) % 2 == 0,
          "avg_pool2: spatial dims must be even");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = h / 2, ow = w / 2;
  Tensor out({n, c, oh, ow});
  const std::size_t planes = static_cast<std::size_t>(n) * c;
  for (std::size_t p = 0; p < planes; ++p) {
    const float* src = x.data() + p * h * w;
    float* dst = out.data() + p * oh * ow;
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        const float* s = src + (2 * y) * w + 2 * xx;
        dst[y * ow + xx] = 0.25f * (s[0] + s[1] + s[w] + s[w + 1]);
      }
    }
  }
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t p = 0; p < planes; ++p) {
      const float* src = gout.data() + p * oh * ow;
      float* dst = gx.data() + p * h * w;
      for (int y = 0; y < oh; ++y) {
        for (int xx = 0; xx < ow; ++xx) {
          const float v = 0.25f * src[y * ow + xx];
          float* d = dst + (2 * y) * w + 2 * xx;
          d[0] += v;
          d[1] += v;
          d[w] += v;
          d[w + 1] += v;
        }
      }
    }
  });
}

Var upsample2(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 4, "upsample2: expected 4-D input");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = 2 * h, ow = 2 * w;
  Tensor out({n, c, oh, ow});
  const std::size_t planes = static_cast<std::size_t>(n) * c;
  for (std::size_t p = 0; p < planes; ++p) {
    const float* src = x.data() + p * h * w;
    float* dst = out.data() + p * oh * ow;
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) dst[y * ow + xx] = src[(y / 2) * w + xx / 2];
    }
  }
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t p = 0; p < planes; ++p) {
      const float* src = gout.data() + p * oh * ow;
      float* dst = gx.data() + p * h * w;
      for (int y = 0; y < oh; ++y) {
        for (int xx = 0; xx < ow; ++xx) dst[(y / 2) * w + xx / 2] += src[y * ow + xx];
      }
    }
  });
}

Var global_avg_pool(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 4, "global_avg_pool: expected 4-D input");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  const float inv = 1.0f / static_cast<float>(n * hw);
  Tensor out({c});
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const float* src = x.data() + (static_cast<std::size_t>(b) * c + ch) * hw;
      double s = 0.0;
      for (std::size_t i = 0; i < hw; ++i) s += src[i];
      out[ch] += static_cast<float>(s) * inv;
    }
  }
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad_buffer(xv);
    for (int b = 0; b < n; ++b) {
      for (int ch = 0; ch < c; ++ch) {
        float* dst = gx.data() + (static_cast<std::size_t>(b) * c + ch) * hw;
        const float v = gout[ch] * inv;
        for (std::size_t i = 0; i < hw; ++i) dst[i] += v;
      }
    }
  });
}

Var clamp01(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  Tensor out = x;
  for (float& v : out.values()) v = std::clamp(v, 0.0f, 1.0f);
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    const Tensor& xin = gr.value(xv);
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      if (xin[i] >= 0.0f && xin[i] <= 1.0f) gx[i] += gout[i];
    }
  });
}

Var add(Graph& g, Var a, Var b) {
  require(g.value(a).same_shape(g.value(b)), "add: shape mismatch");
  Tensor out = g.value(a);
  out.add_(g.value(b));
  return g.record(std::move(out), any_grad(g, {a, b}), [=](Graph& gr, const Tensor& gout) {
    gr.accumulate(a, gout);
    gr.accumulate(b, gout);
  });
}

Var sub(Graph& g, Var a, Var b) {
  require(g.value(a).same_shape(g.value(b)), "sub: shape mismatch");
  Tensor out = g.value(a);
  out.add_scaled_(g.value(b), -1.0f);
  return g.record(std::move(out), any_grad(g, {a, b}), [=](Graph& gr, const Tensor& gout) {
    gr.accumulate(a, gout);
    if (gr.requires_grad(b)) gr.grad_buffer(b).add_scaled_(gout, -1.0f);
  });
}

Var mul(Graph& g, Var a, Var b) {
  require(g.value(a).same_shape(g.value(b)), "mul: shape mismatch");
  Tensor out = g.value(a);
  const Tensor& bv = g.value(b);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  return g.record(std::move(out), any_grad(g, {a, b}), [=](Graph& gr, const Tensor& gout) {
    const Tensor& av = gr.value(a);
    const Tensor& bvv = gr.value(b);
    if (gr.requires_grad(a)) {
      Tensor& ga = gr.grad_buffer(a);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gout[i] * bvv[i];
    }
    if (gr.requires_grad(b)) {
      Tensor& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gout[i] * av[i];
    }
  });
}

Var scale(Graph& g, Var xv, float s) {
  Tensor out = g.value(xv);
  out.scale_(s);
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    gr.grad_buffer(xv).add_scaled_(gout, s);
  });
}

Var relu(Graph& g, Var xv) {
  Tensor out = g.value(xv);
  for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    const Tensor& xin = gr.value(xv);
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      if (xin[i] > 0.0f) gx[i] += gout[i];
    }
  });
}

Var sigmoid(Graph& g, Var xv) {
  Tensor out = g.value(xv);
  for (float& v : out.values()) v = 1.0f / (1.0f + std::exp(-v));
  const Var self{g.size()};
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    const Tensor& y = gr.value(self);
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += gout[i] * y[i] * (1.0f - y[i]);
  });
}

Var reshape(Graph& g, Var xv, std::vector<int> shape) {
  Tensor out = g.value(xv).reshaped(std::move(shape));
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad_buffer(xv);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += gout[i];
  });
}

Var concat0(Graph& g, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat0: no inputs");
  std::vector<int> shape = g.value(parts[0]).shape();
  int lead = 0;
  bool need = false;
  for (Var p : parts) {
    const auto& s = g.value(p).shape();
    require(s.size() == shape.size() &&
                std::equal(s.begin() + 1, s.end(), shape.begin() + 1),
            "concat0: trailing shapes differ");
    lead += s[0];
    need = need || g.requires_grad(p);
  }
  shape[0] = lead;
  Tensor out(shape);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& t = g.value(p);
    std::copy(t.data(), t.data() + t.numel(), out.data() + off);
    off += t.numel();
  }
  return g.record(std::move(out), need, [parts](Graph& gr, const Tensor& gout) {
    std::size_t o = 0;
    for (Var p : parts) {
      const std::size_t n = gr.value(p).numel();
      if (gr.requires_grad(p)) {
        Tensor& gp = gr.grad_buffer(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += gout[o + i];
      }
      o += n;
    }
  });
}

Var mean_squared_error(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require(av.same_shape(bv), "mean_squared_error: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    s += d * d;
  }
  const double n = static_cast<double>(av.numel());
  return g.record(scalar_like(static_cast<float>(s / n)), any_grad(g, {a, b}),
                  [=](Graph& gr, const Tensor& gout) {
                    const Tensor& x = gr.value(a);
                    const Tensor& y = gr.value(b);
                    const float k = static_cast<float>(2.0 / n) * gout[0];
                    if (gr.requires_grad(a)) {
                      Tensor& ga = gr.grad_buffer(a);
                      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += k * (x[i] - y[i]);
                    }
                    if (gr.requires_grad(b)) {
                      Tensor& gb = gr.grad_buffer(b);
                      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= k * (x[i] - y[i]);
                    }
                  });
}

Var sum_squares(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  double s = 0.0;
  for (float v : x.values()) s += static_cast<double>(v) * v;
  return g.record(scalar_like(static_cast<float>(s)), g.requires_grad(xv),
                  [=](Graph& gr, const Tensor& gout) {
                    const Tensor& xin = gr.value(xv);
                    gr.grad_buffer(xv).add_scaled_(xin, 2.0f * gout[0]);
                  });
}

Var l2_norm(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  double s = 0.0;
  for (float v : x.values()) s += static_cast<double>(v) * v;
  const double norm = std::sqrt(s);
  return g.record(scalar_like(static_cast<float>(norm)), g.requires_grad(xv),
                  [=](Graph& gr, const Tensor& gout) {
                    if (norm == 0.0) return;
                    gr.grad_buffer(xv).add_scaled_(gr.value(xv),
                                                   static_cast<float>(gout[0] / norm));
                  });
}

Var mean_all(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  double s = 0.0;
  for (float v : x.values()) s += v;
  const double n = static_cast<double>(x.numel());
  return g.record(scalar_like(static_cast<float>(s / n)), g.requires_grad(xv),
                  [=](Graph& gr, const Tensor& gout) {
                    Tensor& gx = gr.grad_buffer(xv);
                    const float v = static_cast<float>(gout[0] / n);
                    for (float& e : gx.values()) e += v;
                  });
}

Var kl_softmax(Graph& g, Var pv, Var qv) {
  const Tensor& p = g.value(pv);
  const Tensor& q = g.value(qv);
  require(p.numel() == q.numel() && p.numel() > 0, "kl_softmax: size mismatch");
  const std::size_t n = p.numel();
  auto softmax = [n](const Tensor& t) {
    std::vector<double> out(n);
    double mx = t[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max<double>(mx, t[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += out[i] = std::exp(t[i] - mx);
    for (double& v : out) v /= s;
    return out;
  };
  const auto ps = softmax(p);
  const auto qs = softmax(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) kl += ps[i] * (std::log(ps[i]) - std::log(qs[i]));
  return g.record(scalar_like(static_cast<float>(std::max(kl, 0.0))), any_grad(g, {pv, qv}),
                  [=](Graph& gr, const Tensor& gout) {
                    const double go = gout[0];
                    if (gr.requires_grad(pv)) {
                      // dKL/dp_logit_i = P_i * (log P_i - log Q_i - KL)
                      Tensor& gp = gr.grad_buffer(pv);
                      for (std::size_t i = 0; i < n; ++i) {
                        gp[i] += static_cast<float>(
                            go * ps[i] * (std::log(ps[i]) - std::log(qs[i]) - kl));
                      }
                    }
                    if (gr.requires_grad(qv)) {
                      // dKL/dq_logit_i = Q_i - P_i
                      Tensor& gq = gr.grad_buffer(qv);
                      for (std::size_t i = 0; i < n; ++i) {
                        gq[i] += static_cast<float>(go * (qs[i] - ps[i]));
                      }
                    }
                  });
}

Var cosine_distance(Graph& g, Var av, Var bv) {
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  require(a.numel() == b.numel(), "cosine_distance: size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  require(na > 0.0 || nb > 0.0, "cosine_distance: both inputs are zero");
  // One zero vector: cosine taken as 0, distance 1, no gradient.
  const bool degenerate = na == 0.0 || nb == 0.0;
  const double cos = degenerate ? 0.0 : dot / (na * nb);
  return g.record(scalar_like(static_cast<float>(1.0 - cos)), any_grad(g, {av, bv}),
                  [=](Graph& gr, const Tensor& gout) {
                    if (degenerate) return;
                    const Tensor& x = gr.value(av);
                    const Tensor& y = gr.value(bv);
                    const double go = -gout[0];
                    if (gr.requires_grad(av)) {
                      Tensor& ga = gr.grad_buffer(av);
                      for (std::size_t i = 0; i < ga.numel(); ++i) {
                        ga[i] += static_cast<float>(go * (y[i] / (na * nb) - cos * x[i] / (na * na)));
                      }
                    }
                    if (gr.requires_grad(bv)) {
                      Tensor& gb = gr.grad_buffer(bv);
                      for (std::size_t i = 0; i < gb.numel(); ++i) {
                        gb[i] += static_cast<float>(go * (x[i] / (na * nb) - cos * y[i] / (nb * nb)));
                      }
                    }
                  });
}

Var linear(Graph& g, Var xv, Var wv, Var bv) {
  const Tensor& x = g.value(xv);
  const Tensor& w = g.value(wv);
  const Tensor& b = g.value(bv);
  require(x.rank() == 2 && w.rank() == 2 && x.dim(1) == w.dim(1),
          "linear: shape mismatch");
  require(b.numel() == static_cast<std::size_t>(w.dim(0)), "linear: bias size mismatch");
  const int t = x.dim(0), din = x.dim(1), dout = w.dim(0);
  Tensor out({t, dout});
  MapMat om(out.data(), t, dout);
  om.noalias() = ConstMapMat(x.data(), t, din) * ConstMapMat(w.data(), dout, din).transpose();
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < dout; ++c) om(r, c) += b[c];
  }
  return g.record(std::move(out), any_grad(g, {xv, wv, bv}), [=](Graph& gr, const Tensor& gout) {
    ConstMapMat go(gout.data(), t, dout);
    const Tensor& xin = gr.value(xv);
    const Tensor& win = gr.value(wv);
    if (gr.requires_grad(xv)) {
      Tensor& gx = gr.grad_buffer(xv);
      MapMat(gx.data(), t, din).noalias() += go * ConstMapMat(win.data(), dout, din);
    }
    if (gr.requires_grad(wv)) {
      Tensor& gw = gr.grad_buffer(wv);
      MapMat(gw.data(), dout, din).noalias() += go.transpose() * ConstMapMat(xin.data(), t, din);
    }
    if (gr.requires_grad(bv)) {
      Tensor& gb = gr.grad_buffer(bv);
      for (int c = 0; c < dout; ++c) gb[c] += go.col(c).sum();
    }
  });
}

Var matmul(Graph& g, Var av, Var bv) {
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0), "matmul: shape mismatch");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  MapMat(out.data(), m, n).noalias() = ConstMapMat(a.data(), m, k) * ConstMapMat(b.data(), k, n);
  return g.record(std::move(out), any_grad(g, {av, bv}), [=](Graph& gr, const Tensor& gout) {
    ConstMapMat go(gout.data(), m, n);
    if (gr.requires_grad(av)) {
      MapMat(gr.grad_buffer(av).data(), m, k).noalias() +=
          go * ConstMapMat(gr.value(bv).data(), k, n).transpose();
    }
    if (gr.requires_grad(bv)) {
      MapMat(gr.grad_buffer(bv).data(), k, n).noalias() +=
          ConstMapMat(gr.value(av).data(), m, k).transpose() * go;
    }
  });
}

Var transpose(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 2, "transpose: expected 2-D input");
  const int r = x.dim(0), c = x.dim(1);
  Tensor out({c, r});
  MapMat(out.data(), c, r) = ConstMapMat(x.data(), r, c).transpose();
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    MapMat(gr.grad_buffer(xv).data(), r, c) += ConstMapMat(gout.data(), c, r).transpose();
  });
}

Var softmax_rows(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 2, "softmax_rows: expected 2-D input");
  const int r = x.dim(0), c = x.dim(1);
  Tensor out({r, c});
  for (int i = 0; i < r; ++i) {
    const float* src = x.data() + static_cast<std::size_t>(i) * c;
    float* dst = out.data() + static_cast<std::size_t>(i) * c;
    const float mx = *std::max_element(src, src + c);
    float s = 0.0f;
    for (int j = 0; j < c; ++j) s += dst[j] = std::exp(src[j] - mx);
    for (int j = 0; j < c; ++j) dst[j] /= s;
  }
  const Var self{g.size()};
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    const Tensor& y = gr.value(self);
    Tensor& gx = gr.grad_buffer(xv);
    for (int i = 0; i < r; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * c;
      float dot = 0.0f;
      for (int j = 0; j < c; ++j) dot += gout[off + j] * y[off + j];
      for (int j = 0; j < c; ++j) gx[off + j] += y[off + j] * (gout[off + j] - dot);
    }
  });
}

Var layer_norm(Graph& g, Var xv, Var gv, Var bv, float eps) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 2, "layer_norm: expected 2-D input");
  const int r = x.dim(0), c = x.dim(1);
  require(g.value(gv).numel() == static_cast<std::size_t>(c) &&
              g.value(bv).numel() == static_cast<std::size_t>(c),
          "layer_norm: affine size mismatch");
  auto xhat = std::make_shared<std::vector<float>>(x.numel());
  auto inv_std = std::make_shared<std::vector<float>>(r);
  Tensor out({r, c});
  const Tensor& gamma = g.value(gv);
  const Tensor& beta = g.value(bv);
  for (int i = 0; i < r; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * c;
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += x[off + j];
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) var += (x[off + j] - mean) * (x[off + j] - mean);
    var /= c;
    const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
    (*inv_std)[i] = is;
    for (int j = 0; j < c; ++j) {
      const float xh = static_cast<float>(x[off + j] - mean) * is;
      (*xhat)[off + j] = xh;
      out[off + j] = gamma[j] * xh + beta[j];
    }
  }
  return g.record(std::move(out), any_grad(g, {xv, gv, bv}), [=](Graph& gr, const Tensor& gout) {
    const Tensor& gam = gr.value(gv);
    if (gr.requires_grad(gv)) {
      Tensor& gg = gr.grad_buffer(gv);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) gg[j] += gout[static_cast<std::size_t>(i) * c + j] * (*xhat)[static_cast<std::size_t>(i) * c + j];
    }
    if (gr.requires_grad(bv)) {
      Tensor& gb = gr.grad_buffer(bv);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) gb[j] += gout[static_cast<std::size_t>(i) * c + j];
    }
    if (gr.requires_grad(xv)) {
      Tensor& gx = gr.grad_buffer(xv);
      for (int i = 0; i < r; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * c;
        float sum_d = 0.0f, sum_dx = 0.0f;
        for (int j = 0; j < c; ++j) {
          const float d = gout[off + j] * gam[j];
          sum_d += d;
          sum_dx += d * (*xhat)[off + j];
        }
        for (int j = 0; j < c; ++j) {
          const float d = gout[off + j] * gam[j];
          gx[off + j] += (*inv_std)[i] / c * (c * d - sum_d - (*xhat)[off + j] * sum_dx);
        }
      }
    }
  });
}

Var mean_rows(Graph& g, Var xv) {
  const Tensor& x = g.value(xv);
  require(x.rank() == 2, "mean_rows: expected 2-D input");
  const int r = x.dim(0), c = x.dim(1);
  Tensor out({1, c});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j] += x[static_cast<std::size_t>(i) * c + j];
  out.scale_(1.0f / r);
  return g.record(std::move(out), g.requires_grad(xv), [=](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad_buffer(xv);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) gx[static_cast<std::size_t>(i) * c + j] += gout[j] / r;
  });
}

}  // namespace distillir::nn
