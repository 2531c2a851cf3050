#pragma once

// Pyramidal Lucas-Kanade point tracking and the average-shift score built
// on top of it. Tracking failures are reported per point through the
// validity flags, never as exceptions.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadflow/corners.hpp"
#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

struct TrackParams {
  int pyramid_levels = 3;
  int window_radius = 10;   // 21x21 window
  int max_iterations = 30;
  double epsilon = 0.01;    // stop when the update drops below this (px)
};

namespace detail {

inline ScalarField to_gray255(const Image& img) {
  ScalarField g(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      g.at(x, y) = luma(img, x, y) * 255.0;
  return g;
}

struct TrackOutcome {
  Point p;
  bool ok;
};

inline TrackOutcome track_one(const std::vector<ScalarField>& from_pyr,
                              const std::vector<ScalarField>& to_pyr,
                              Point start, const TrackParams& params) {
  const int w0 = from_pyr[0].width;
  const int h0 = from_pyr[0].height;
  if (start.x < 0.0 || start.x > w0 - 1 || start.y < 0.0 || start.y > h0 - 1)
    return {start, false};

  const int r = params.window_radius;
  const double win_area = static_cast<double>(2 * r + 1) * (2 * r + 1);
  double gx_acc = 0.0, gy_acc = 0.0;  // accumulated guess, finest scale of the
                                      // level below

  for (int level = static_cast<int>(from_pyr.size()) - 1; level >= 0; --level) {
    const ScalarField& from = from_pyr[level];
    const ScalarField& to = to_pyr[level];
    const double scale = static_cast<double>(1 << level);
    const double px = start.x / scale;
    const double py = start.y / scale;

    // Spatial gradient matrix of the source window, fixed for the level.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    std::vector<double> ix((2 * r + 1) * (2 * r + 1));
    std::vector<double> iy(ix.size());
    std::vector<double> iv(ix.size());
    int k = 0;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx, ++k) {
        const double x = px + dx;
        const double y = py + dy;
        iv[k] = sample_bilinear(from, x, y);
        ix[k] = 0.5 * (sample_bilinear(from, x + 1, y) -
                       sample_bilinear(from, x - 1, y));
        iy[k] = 0.5 * (sample_bilinear(from, x, y + 1) -
                       sample_bilinear(from, x, y - 1));
        a11 += ix[k] * ix[k];
        a12 += ix[k] * iy[k];
        a22 += iy[k] * iy[k];
      }
    }
    const double det = a11 * a22 - a12 * a12;
    const double min_eig =
        0.5 * (a11 + a22 - std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
    if (level == 0 && min_eig / win_area < 1e-4)
      return {start, false};  // window has no trackable structure

    double nx = 0.0, ny = 0.0;
    if (det > 1e-12) {
      for (int iter = 0; iter < params.max_iterations; ++iter) {
        double b1 = 0.0, b2 = 0.0;
        k = 0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx, ++k) {
            const double diff = iv[k] - sample_bilinear(to, px + gx_acc + nx + dx,
                                                        py + gy_acc + ny + dy);
            b1 += diff * ix[k];
            b2 += diff * iy[k];
          }
        }
        const double ux = (a22 * b1 - a12 * b2) / det;
        const double uy = (a11 * b2 - a12 * b1) / det;
        nx += ux;
        ny += uy;
        if (!std::isfinite(nx) || !std::isfinite(ny) ||
            std::hypot(nx, ny) > 30.0)
          return {start, false};  // diverged
        if (std::hypot(ux, uy) < params.epsilon) break;
      }
    }

    if (level > 0) {
      gx_acc = 2.0 * (gx_acc + nx);
      gy_acc = 2.0 * (gy_acc + ny);
    } else {
      gx_acc += nx;
      gy_acc += ny;
    }
  }

  Point out{start.x + gx_acc, start.y + gy_acc};
  if (!std::isfinite(out.x) || !std::isfinite(out.y) || out.x < 0.0 ||
      out.x > w0 - 1 || out.y < 0.0 || out.y > h0 - 1)
    return {start, false};
  return {out, true};
}

}  // namespace detail

// Tracks each point from `from` into `to`. The result list is aligned with
// the input; points that start outside the frame, diverge, lack texture,
// or land outside the frame come back with validity false.
inline PointList track_points(const Image& from, const Image& to,
                              const PointList& points,
                              const TrackParams& params = {}) {
  if (!from.same_size(to))
    throw std::invalid_argument("track_points: image dimensions differ");
  if (params.pyramid_levels < 1)
    throw std::invalid_argument("track_points: pyramid_levels must be >= 1");
  if (params.window_radius < 1 || params.max_iterations < 1 ||
      !(params.epsilon > 0.0))
    throw std::invalid_argument("track_points: bad window/iteration parameters");

  std::vector<ScalarField> from_pyr{detail::to_gray255(from)};
  std::vector<ScalarField> to_pyr{detail::to_gray255(to)};
  for (int l = 1; l < params.pyramid_levels; ++l) {
    if (from_pyr.back().width < 2 || from_pyr.back().height < 2) break;
    from_pyr.push_back(downsample_half(from_pyr.back()));
    to_pyr.push_back(downsample_half(to_pyr.back()));
  }

  PointList out;
  out.pts.resize(points.size());
  out.valid.resize(points.size());
  parallel_rows(static_cast<int>(points.size()), [&](int i) {
    if (!points.valid[i]) {
      out.pts[i] = points.pts[i];
      out.valid[i] = 0;
      return;
    }
    const auto r = detail::track_one(from_pyr, to_pyr, points.pts[i], params);
    out.pts[i] = r.p;
    out.valid[i] = r.ok ? 1 : 0;
  });
  return out;
}

// Mean Euclidean distance between aligned point lists over the indices
// valid in both. Throws when the lists disagree in length or share no
// valid point.
inline double asfp(const PointList& gt_points, const PointList& pred_points) {
  if (gt_points.size() != pred_points.size())
    throw std::invalid_argument("asfp: point lists differ in length");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt_points.size(); ++i) {
    if (!gt_points.valid[i] || !pred_points.valid[i]) continue;
    sum += std::hypot(gt_points.pts[i].x - pred_points.pts[i].x,
                      gt_points.pts[i].y - pred_points.pts[i].y);
    ++n;
  }
  if (n == 0) throw std::runtime_error("asfp: no common valid points");
  return sum / static_cast<double>(n);
}

// Full average-shift pipeline: corners found on the base frame are tracked
// independently into the ground-truth and predicted frames and the two
// tracked lists are scored against each other.
inline double asfp_between(const Image& base, const Image& ground_truth,
                           const Image& prediction,
                           const CornerParams& corner_params = {},
                           const TrackParams& track_params = {}) {
  const PointList corners = detect_corners(base, corner_params);
  if (corners.size() == 0)
    throw std::runtime_error("asfp: no corners detected in the base frame");
  const PointList in_gt = track_points(base, ground_truth, corners, track_params);
  const PointList in_pred = track_points(base, prediction, corners, track_params);
  return asfp(in_gt, in_pred);
}

}  // namespace quadflow
