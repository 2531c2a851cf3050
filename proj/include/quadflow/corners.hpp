#pragma once

// Shi-Tomasi corner detection: minimum eigenvalue of the 3x3 structure
// tensor built from Sobel gradients, local maxima filtered by a relative
// quality threshold and greedy distance suppression.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "quadflow/image.hpp"

namespace quadflow {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Ordered point positions with parallel validity flags. Lists that are
// compared index-by-index (tracking output against tracking output) must
// keep the same length and ordering.
struct PointList {
  std::vector<Point> pts;
  std::vector<uint8_t> valid;

  std::size_t size() const { return pts.size(); }

  void push_back(Point p, bool ok) {
    pts.push_back(p);
    valid.push_back(ok ? 1 : 0);
  }
};

struct CornerParams {
  int max_points = 10000;
  double quality = 0.01;     // relative to the strongest response
  double min_distance = 8.0; // Euclidean suppression radius in pixels
};

namespace detail {

// Sobel derivative scaled by 1/8 so gradients are in intensity units per
// pixel; coordinates clamp at the border.
inline void sobel_gradients(const std::vector<double>& img, int w, int h,
                            std::vector<double>& gx, std::vector<double>& gy) {
  gx.assign(img.size(), 0.0);
  gy.assign(img.size(), 0.0);
  auto px = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return img[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = (px(x + 1, y - 1) - px(x - 1, y - 1) +
               2.0 * (px(x + 1, y) - px(x - 1, y)) +
               px(x + 1, y + 1) - px(x - 1, y + 1)) / 8.0;
      gy[i] = (px(x - 1, y + 1) - px(x - 1, y - 1) +
               2.0 * (px(x, y + 1) - px(x, y - 1)) +
               px(x + 1, y + 1) - px(x + 1, y - 1)) / 8.0;
    }
  }
}

}  // namespace detail

// Corner detection on luma. Returns up to max_points positions sorted by
// descending response; a constant image yields an empty list.
inline PointList detect_corners(const Image& img, const CornerParams& params = {}) {
  if (params.max_points <= 0)
    throw std::invalid_argument("detect_corners: max_points must be positive");
  if (params.quality <= 0.0 || params.quality > 1.0)
    throw std::invalid_argument("detect_corners: quality must be in (0, 1]");
  if (params.min_distance < 0.0)
    throw std::invalid_argument("detect_corners: min_distance must be >= 0");

  const int w = img.width;
  const int h = img.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> gray(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray[static_cast<std::size_t>(y) * w + x] = luma(img, x, y) * 255.0;

  std::vector<double> gx, gy;
  detail::sobel_gradients(gray, w, h, gx, gy);

  // Minimum eigenvalue of the box-summed structure tensor.
  std::vector<double> score(n, 0.0);
  double global_max = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          const int yy = std::clamp(y + dy, 0, h - 1);
          const std::size_t i = static_cast<std::size_t>(yy) * w + xx;
          sxx += gx[i] * gx[i];
          sxy += gx[i] * gy[i];
          syy += gy[i] * gy[i];
        }
      }
      const double tr = sxx + syy;
      const double det_disc =
          std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
      const double s = 0.5 * (tr - det_disc);
      score[static_cast<std::size_t>(y) * w + x] = s;
      global_max = std::max(global_max, s);
    }
  }

  PointList out;
  if (global_max <= 1e-12) return out;  // flat image, nothing to detect

  // Local maxima over the 8-neighborhood, 1-pixel border excluded.
  // On plateaus only the first pixel in scan order survives: earlier-scan
  // neighbors must be strictly smaller, later-scan ones at most equal.
  struct Candidate {
    double s;
    int x, y;
  };
  std::vector<Candidate> cands;
  const double threshold = params.quality * global_max;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double s = score[static_cast<std::size_t>(y) * w + x];
      if (s < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1 && is_max; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double sn =
              score[static_cast<std::size_t>(y + dy) * w + (x + dx)];
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (earlier ? sn >= s : sn > s) is_max = false;
        }
      }
      if (is_max) cands.push_back({s, x, y});
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.s != b.s) return a.s > b.s;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  const double min_d2 = params.min_distance * params.min_distance;
  for (const Candidate& c : cands) {
    if (static_cast<int>(out.size()) >= params.max_points) break;
    bool clear = true;
    for (const Point& p : out.pts) {
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      if (dx * dx + dy * dy < min_d2) {
        clear = false;
        break;
      }
    }
    if (clear) out.push_back({static_cast<double>(c.x), static_cast<double>(c.y)}, true);
  }
  return out;
}

}  // namespace quadflow
