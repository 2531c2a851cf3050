#pragma once

#include <cmath>
#include <vector>

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

struct HornSchunckParams {
  int pyramid_levels = 3;  // downsample x0.5 per level with a 2x2 box prefilter
  double alpha = 10.0;     // smoothness weight
  int iterations = 100;    // Jacobi sweeps per level
};

namespace detail {

// Bilinear flow upsample to (w,h) with components doubled for the finer grid.
inline FlowField upsample_flow(const FlowField& coarse, int w, int h) {
  FlowField fine(w, h);
  const double sx = static_cast<double>(coarse.width) / w;
  const double sy = static_cast<double>(coarse.height) / h;
  for (int y = 0; y < h; ++y) {
    const double cy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < w; ++x) {
      const double cx = (x + 0.5) * sx - 0.5;
      const double ccx = std::clamp(cx, 0.0, static_cast<double>(coarse.width - 1));
      const double ccy = std::clamp(cy, 0.0, static_cast<double>(coarse.height - 1));
      const int x0 = static_cast<int>(std::floor(ccx));
      const int y0 = static_cast<int>(std::floor(ccy));
      const int x1 = std::min(x0 + 1, coarse.width - 1);
      const int y1 = std::min(y0 + 1, coarse.height - 1);
      const double fx = ccx - x0, fy = ccy - y0;
      const double u = (coarse.u(x0, y0) * (1 - fx) + coarse.u(x1, y0) * fx) * (1 - fy) +
                       (coarse.u(x0, y1) * (1 - fx) + coarse.u(x1, y1) * fx) * fy;
      const double v = (coarse.v(x0, y0) * (1 - fx) + coarse.v(x1, y0) * fx) * (1 - fy) +
                       (coarse.v(x0, y1) * (1 - fx) + coarse.v(x1, y1) * fx) * fy;
      fine.u(x, y) = 2.0 * u;
      fine.v(x, y) = 2.0 * v;
    }
  }
  return fine;
}

// One pyramid level: warp the target by the incoming flow, linearize
// brightness constancy there, then run Jacobi sweeps of the classic update
//   u <- ubar - Ix (Ix ubar + Iy vbar + It') / (alpha^2 + Ix^2 + Iy^2)
// with It' folding the linearization point into the temporal term.
inline void solve_level(const ScalarField& src, const ScalarField& tgt, FlowField& flow,
                        const HornSchunckParams& p) {
  const int w = src.width, h = src.height;
  ScalarField warped(w, h), ix(w, h), iy(w, h), itc(w, h);

  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x)
      warped.at(x, y) = sample_bilinear(tgt, x + flow.u(x, y), y + flow.v(x, y));
  });
  // Spatial gradients of the average frame (central differences, clamped);
  // temporal difference taken on the warped target.
  parallel_rows(h, [&](int y) {
    const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      ix.at(x, y) = 0.25 * (src.at(xp, y) - src.at(xm, y) + warped.at(xp, y) - warped.at(xm, y));
      iy.at(x, y) = 0.25 * (src.at(x, yp) - src.at(x, ym) + warped.at(x, yp) - warped.at(x, ym));
      itc.at(x, y) = warped.at(x, y) - src.at(x, y) - ix.at(x, y) * flow.u(x, y) -
                     iy.at(x, y) * flow.v(x, y);
    }
  });

  const double alpha2 = p.alpha * p.alpha;
  FlowField next(w, h);
  for (int it = 0; it < p.iterations; ++it) {
    parallel_rows(h, [&](int y) {
      const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
      for (int x = 0; x < w; ++x) {
        const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
        const double ubar =
            0.25 * (flow.u(xm, y) + flow.u(xp, y) + flow.u(x, ym) + flow.u(x, yp));
        const double vbar =
            0.25 * (flow.v(xm, y) + flow.v(xp, y) + flow.v(x, ym) + flow.v(x, yp));
        const double gx = ix.at(x, y), gy = iy.at(x, y);
        const double common =
            (gx * ubar + gy * vbar + itc.at(x, y)) / (alpha2 + gx * gx + gy * gy);
        next.u(x, y) = ubar - gx * common;
        next.v(x, y) = vbar - gy * common;
      }
    });
    std::swap(flow.data, next.data);
  }
}

}  // namespace detail

// Pyramidal Horn-Schunck with warping. Returns per-pixel displacement
// mapping source pixel x to target position x + f(x). Deterministic for
// fixed inputs and parameters at any thread count (Jacobi double-buffering).
inline FlowField estimate_flow(const Image& source, const Image& target,
                               const HornSchunckParams& params = {}) {
  if (source.width != target.width || source.height != target.height)
    throw std::invalid_argument("estimate_flow: image dimensions differ");
  if (params.pyramid_levels < 1 || params.iterations < 0 || !(params.alpha > 0.0))
    throw std::invalid_argument("estimate_flow: bad parameters");

  // Luma scaled to 0..255 so the default alpha balances data terms of
  // ordinary 8-bit content.
  std::vector<ScalarField> src_pyr, tgt_pyr;
  {
    ScalarField s = luma(source), t = luma(target);
    for (double& v : s.data) v *= 255.0;
    for (double& v : t.data) v *= 255.0;
    src_pyr.push_back(std::move(s));
    tgt_pyr.push_back(std::move(t));
  }
  for (int level = 1; level < params.pyramid_levels; ++level) {
    src_pyr.push_back(downsample_half(src_pyr.back()));
    tgt_pyr.push_back(downsample_half(tgt_pyr.back()));
  }
  if (src_pyr.back().width < 4 || src_pyr.back().height < 4)
    throw std::invalid_argument("estimate_flow: image smaller than the coarsest pyramid level (" +
                                std::to_string(src_pyr.back().width) + "x" +
                                std::to_string(src_pyr.back().height) + " < 4x4)");

  FlowField flow(src_pyr.back().width, src_pyr.back().height);
  for (int level = params.pyramid_levels - 1; level >= 0; --level) {
    if (level != params.pyramid_levels - 1)
      flow = detail::upsample_flow(flow, src_pyr[level].width, src_pyr[level].height);
    detail::solve_level(src_pyr[level], tgt_pyr[level], flow, params);
  }
  require_finite(flow, "estimate_flow");
  return flow;
}

}  // namespace quadflow
