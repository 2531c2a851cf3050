#pragma once

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

struct WarpResult {
  Image image;
  HoleMask validity;  // reusing the mask type: true = sample point stayed in bounds
};

// Backward warp: out(u) = bilinear sample of img at u + flow(u). Sampling is
// clamped to the image rectangle; validity records whether the unclamped
// sample point was inside [0,W-1]x[0,H-1].
inline WarpResult backward_warp(const Image& img, const FlowField& flow) {
  if (img.width != flow.width || img.height != flow.height)
    throw std::invalid_argument("backward_warp: flow dimensions differ from image");
  WarpResult res{Image(img.width, img.height, img.channels), HoleMask(img.width, img.height)};
  parallel_rows(img.height, [&](int y) {
    for (int x = 0; x < img.width; ++x) {
      const double sx = x + flow.u(x, y);
      const double sy = y + flow.v(x, y);
      const bool inside =
          sx >= 0.0 && sx <= img.width - 1 && sy >= 0.0 && sy <= img.height - 1;
      res.validity.set(x, y, inside);
      for (int c = 0; c < img.channels; ++c)
        res.image.at(x, y, c) = sample_bilinear(img, sx, sy, c);
    }
  });
  return res;
}

}  // namespace quadflow
