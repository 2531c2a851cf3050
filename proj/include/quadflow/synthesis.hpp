#pragma once

#include <string>

#include "quadflow/flow_filter.hpp"
#include "quadflow/flow_provider.hpp"
#include "quadflow/flow_reversal.hpp"
#include "quadflow/image.hpp"
#include "quadflow/quadratic_motion.hpp"
#include "quadflow/warp.hpp"

namespace quadflow {

// Per-pixel blending weight between the two warped source frames, in [0,1].
// 1 selects the frame-0 warp, 0 selects the frame-1 warp.
struct FusionMask {
  ScalarField m;
};

enum class MotionModel { Quadratic, Linear };

struct InterpolateConfig {
  MotionModel model = MotionModel::Quadratic;
  double sigma = 1.0;        // reversal Gaussian
  double radius = 1.0;       // reversal neighborhood (Chebyshev, exclusive)
  int filter_k = 2;          // medoid filter support
  double filter_tau = 2.0;   // outlier threshold in pixels
  FlowProvider provider;
};

// Rule-based mask: 0.5 everywhere a priori; where one side's flow is a
// reversal hole or its warp sampled out of bounds and the other side is
// fine, weight moves entirely to the good side. Both-bad pixels keep 0.5,
// which in fuse() reduces to the plain (1-t, t) temporal blend.
inline FusionMask build_fusion_mask(const HoleMask& holes0, const HoleMask& valid0,
                                    const HoleMask& holes1, const HoleMask& valid1) {
  FusionMask mask{ScalarField(holes0.width, holes0.height, 0.5)};
  for (int y = 0; y < holes0.height; ++y) {
    for (int x = 0; x < holes0.width; ++x) {
      const bool bad0 = holes0.is_hole(x, y) || !valid0.at(x, y);
      const bool bad1 = holes1.is_hole(x, y) || !valid1.at(x, y);
      if (bad0 && !bad1)
        mask.m.at(x, y) = 0.0;
      else if (bad1 && !bad0)
        mask.m.at(x, y) = 1.0;
    }
  }
  return mask;
}

// Temporally weighted fusion of the two warped frames:
//   out = [(1-t) m w0 + t (1-m) w1] / [(1-t) m + t (1-m)]
// falling back to the plain temporal blend when the denominator vanishes.
inline Image fuse(const Image& w0, const Image& w1, const FusionMask& mask, double t) {
  if (!w0.same_size(w1)) throw std::invalid_argument("fuse: image dimensions differ");
  if (w0.width != mask.m.width || w0.height != mask.m.height)
    throw std::invalid_argument("fuse: mask dimensions differ");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("fuse: t must lie in (0,1)");
  Image out(w0.width, w0.height, w0.channels);
  for (int y = 0; y < w0.height; ++y) {
    for (int x = 0; x < w0.width; ++x) {
      const double m = std::clamp(mask.m.at(x, y), 0.0, 1.0);
      const double a = (1.0 - t) * m;
      const double b = t * (1.0 - m);
      const double denom = a + b;
      for (int c = 0; c < w0.channels; ++c) {
        const double p0 = w0.at(x, y, c), p1 = w1.at(x, y, c);
        // One-sided weights pass the surviving warp through untouched so a
        // hole-filled pixel is bit-equal to its source.
        if (denom < 1e-9)
          out.at(x, y, c) = (1.0 - t) * p0 + t * p1;
        else if (b == 0.0)
          out.at(x, y, c) = p0;
        else if (a == 0.0)
          out.at(x, y, c) = p1;
        else
          out.at(x, y, c) = (a * p0 + b * p1) / denom;
      }
    }
  }
  clamp01(out);
  return out;
}

namespace detail {
template <typename Fn>
auto stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(label) + ": " + e.what());
  }
}
}  // namespace detail

// Full pipeline for one intermediate time t in (0,1): pairwise flows, motion
// model, forward-flow prediction for both sides, reversal, filtering,
// backward warping of frames 0 and 1, and fusion. Frames -1 and 2 only ever
// feed motion estimation; no pixel of theirs reaches the output.
inline Image interpolate(const Image& frame_m1, const Image& frame_0, const Image& frame_1,
                         const Image& frame_2, double t, const InterpolateConfig& cfg = {}) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("interpolate: t must lie in (0,1)");

  const QuartetFlows flows = detail::stage("flow-estimation", [&] {
    return flows_for_quartet(cfg.provider, frame_m1, frame_0, frame_1, frame_2);
  });

  // Side 0 predicts frame0 -> t; side 1 predicts frame1 -> t, which in the
  // frame-1 clock (f10 as +1 direction) is the offset 1-t.
  FlowField fwd0, fwd1;
  if (cfg.model == MotionModel::Quadratic) {
    fwd0 = detail::stage("flow-prediction", [&] {
      return predict_flow(fit_quadratic(flows.f01, flows.f0m1), t);
    });
    fwd1 = detail::stage("flow-prediction", [&] {
      return predict_flow(fit_quadratic(flows.f10, flows.f12), 1.0 - t);
    });
  } else {
    fwd0 = detail::stage("flow-prediction", [&] { return predict_linear(flows.f01, t); });
    fwd1 = detail::stage("flow-prediction", [&] { return predict_linear(flows.f10, 1.0 - t); });
  }

  const ReversalResult rev0 =
      detail::stage("flow-reversal", [&] { return reverse_flow(fwd0, cfg.sigma, cfg.radius); });
  const ReversalResult rev1 =
      detail::stage("flow-reversal", [&] { return reverse_flow(fwd1, cfg.sigma, cfg.radius); });

  const FlowField bwd0 = detail::stage("flow-filter", [&] {
    return filter_flow(rev0.flow, rev0.holes, cfg.filter_k, cfg.filter_tau);
  });
  const FlowField bwd1 = detail::stage("flow-filter", [&] {
    return filter_flow(rev1.flow, rev1.holes, cfg.filter_k, cfg.filter_tau);
  });

  const WarpResult w0 = detail::stage("warp", [&] { return backward_warp(frame_0, bwd0); });
  const WarpResult w1 = detail::stage("warp", [&] { return backward_warp(frame_1, bwd1); });

  return detail::stage("fuse", [&] {
    const FusionMask mask = build_fusion_mask(rev0.holes, w0.validity, rev1.holes, w1.validity);
    return fuse(w0.image, w1.image, mask, t);
  });
}

}  // namespace quadflow
