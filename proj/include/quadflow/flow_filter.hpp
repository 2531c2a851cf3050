#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

// Medoid-based flow cleanup. For each pixel u the candidate set C(u) holds
// the flow values of non-hole pixels within Chebyshev radius k (u included
// when it is not a hole). The medoid minimizes the summed Euclidean distance
// to all candidates, ties broken by row-major candidate position. Holes are
// replaced by the medoid; non-holes farther than tau from the medoid are
// outliers and replaced too; everything else passes through unchanged. The
// output is always a value already present in the input (or (0,0) when C(u)
// is empty), so no new flow vectors are invented.
inline FlowField filter_flow(const FlowField& f, const HoleMask& holes, int k = 2,
                             double tau = 2.0) {
  if (f.width != holes.width || f.height != holes.height)
    throw std::invalid_argument("filter_flow: mask dimensions differ from flow");
  if (k < 1 || k > 10) throw std::invalid_argument("filter_flow: k must be in [1,10]");
  if (tau < 0.0 || !std::isfinite(tau)) throw std::invalid_argument("filter_flow: tau must be >= 0");
  const int w = f.width, h = f.height;
  FlowField out(w, h);

  parallel_rows(h, [&](int y) {
    std::vector<double> cu, cv;
    cu.reserve((2 * k + 1) * (2 * k + 1));
    cv.reserve((2 * k + 1) * (2 * k + 1));
    for (int x = 0; x < w; ++x) {
      cu.clear();
      cv.clear();
      const int y0 = std::max(0, y - k), y1 = std::min(h - 1, y + k);
      const int x0 = std::max(0, x - k), x1 = std::min(w - 1, x + k);
      for (int ny = y0; ny <= y1; ++ny)
        for (int nx = x0; nx <= x1; ++nx)
          if (!holes.is_hole(nx, ny)) {
            cu.push_back(f.u(nx, ny));
            cv.push_back(f.v(nx, ny));
          }
      if (cu.empty()) {
        out.u(x, y) = 0.0;
        out.v(x, y) = 0.0;
        continue;
      }
      size_t best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < cu.size(); ++i) {
        double cost = 0.0;
        for (size_t j = 0; j < cu.size(); ++j)
          cost += std::hypot(cu[i] - cu[j], cv[i] - cv[j]);
        if (cost < best_cost) {
          best_cost = cost;
          best = i;
        }
      }
      const double mu = cu[best], mv = cv[best];
      if (holes.is_hole(x, y)) {
        out.u(x, y) = mu;
        out.v(x, y) = mv;
      } else {
        const double du = f.u(x, y) - mu, dv = f.v(x, y) - mv;
        if (std::hypot(du, dv) > tau) {
          out.u(x, y) = mu;
          out.v(x, y) = mv;
        } else {
          out.u(x, y) = f.u(x, y);
          out.v(x, y) = f.v(x, y);
        }
      }
    }
  });
  return out;
}

}  // namespace quadflow
