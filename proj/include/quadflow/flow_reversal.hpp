#pragma once

#include <cmath>
#include <vector>

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

// Backward flow produced by splatting, plus the pixels nothing splatted onto.
struct ReversalResult {
  FlowField flow;          // f_{t->0}; (0,0) at holes
  HoleMask holes;          // true where total splat weight < hole_weight_epsilon
  ScalarField weight_sum;  // accumulated Gaussian weight per target pixel
};

constexpr double hole_weight_epsilon = 1e-6;

// Converts forward flow to backward flow. Every source pixel x lands at
// x + f(x); each integer target u within Chebyshev distance < radius of the
// landing point accumulates weight exp(-d^2/sigma^2) (d Euclidean) and the
// negated flow. Sources landing outside the image contribute nothing.
//
// Gather formulation: sources are bucketed by the integer cell of their
// landing point, and each target sums its candidates in a fixed order, so
// results are bit-identical for any thread count.
inline ReversalResult reverse_flow(const FlowField& f0t, double sigma = 1.0, double radius = 1.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("reverse_flow: sigma must be positive");
  if (!(radius >= 1.0)) throw std::invalid_argument("reverse_flow: radius must be >= 1");
  const int w = f0t.width, h = f0t.height;
  const size_t cells = static_cast<size_t>(w) * h;

  // CSR bucket of source indices by landing cell, filled in row-major
  // source order.
  std::vector<int> counts(cells + 1, 0);
  std::vector<double> land(static_cast<size_t>(w) * h * 2);
  std::vector<int> cell_of(cells);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const double px = x + f0t.u(x, y);
      const double py = y + f0t.v(x, y);
      land[i * 2] = px;
      land[i * 2 + 1] = py;
      if (px < 0.0 || px > w - 1 || py < 0.0 || py > h - 1) {
        cell_of[i] = -1;
        continue;
      }
      const int cx = static_cast<int>(std::floor(px));
      const int cy = static_cast<int>(std::floor(py));
      cell_of[i] = cy * w + cx;
      ++counts[cell_of[i] + 1];
    }
  }
  for (size_t c = 1; c <= cells; ++c) counts[c] += counts[c - 1];
  std::vector<int> bucket(counts[cells]);
  {
    std::vector<int> cursor(counts.begin(), counts.end() - 1);
    for (size_t i = 0; i < cells; ++i)
      if (cell_of[i] >= 0) bucket[cursor[cell_of[i]]++] = static_cast<int>(i);
  }

  ReversalResult res;
  res.flow = FlowField(w, h);
  res.holes = HoleMask(w, h);
  res.weight_sum = ScalarField(w, h);
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  const int reach = static_cast<int>(std::floor(radius)) + 1;

  parallel_rows(h, [&](int uy) {
    for (int ux = 0; ux < w; ++ux) {
      double wsum = 0.0, usum = 0.0, vsum = 0.0;
      const int cy0 = std::max(0, uy - reach), cy1 = std::min(h - 1, uy + reach);
      const int cx0 = std::max(0, ux - reach), cx1 = std::min(w - 1, ux + reach);
      for (int cy = cy0; cy <= cy1; ++cy) {
        for (int cx = cx0; cx <= cx1; ++cx) {
          const int cell = cy * w + cx;
          for (int k = counts[cell]; k < counts[cell + 1]; ++k) {
            const int src = bucket[k];
            const double dx = land[static_cast<size_t>(src) * 2] - ux;
            const double dy = land[static_cast<size_t>(src) * 2 + 1] - uy;
            if (std::abs(dx) >= radius || std::abs(dy) >= radius) continue;
            const double wgt = std::exp(-(dx * dx + dy * dy) * inv_sigma2);
            wsum += wgt;
            usum -= wgt * f0t.data[static_cast<size_t>(src) * 2];
            vsum -= wgt * f0t.data[static_cast<size_t>(src) * 2 + 1];
          }
        }
      }
      res.weight_sum.at(ux, uy) = wsum;
      if (wsum < hole_weight_epsilon) {
        res.holes.set(ux, uy, true);
      } else {
        res.flow.u(ux, uy) = usum / wsum;
        res.flow.v(ux, uy) = vsum / wsum;
      }
    }
  });
  return res;
}

}  // namespace quadflow
