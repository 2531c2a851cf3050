#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadflow {

// Row-major raster with interleaved channels, samples in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw std::invalid_argument("Image: bad dimensions " + std::to_string(w) + "x" +
                                  std::to_string(h) + "x" + std::to_string(c));
    data.assign(static_cast<size_t>(w) * h * c, std::clamp(fill, 0.0, 1.0));
  }

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool same_size(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Row-major field of (u,v) displacement pairs, in pixels. Components are
// always finite; unknown flow is expressed through a HoleMask, never a sentinel.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // u,v interleaved

  FlowField() = default;
  FlowField(int w, int h, double u0 = 0.0, double v0 = 0.0) : width(w), height(h) {
    if (w <= 0 || h <= 0)
      throw std::invalid_argument("FlowField: bad dimensions " + std::to_string(w) + "x" +
                                  std::to_string(h));
    data.resize(static_cast<size_t>(w) * h * 2);
    for (size_t i = 0; i < data.size(); i += 2) {
      data[i] = u0;
      data[i + 1] = v0;
    }
  }

  double& u(int x, int y) { return data[(static_cast<size_t>(y) * width + x) * 2]; }
  double& v(int x, int y) { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
  double u(int x, int y) const { return data[(static_cast<size_t>(y) * width + x) * 2]; }
  double v(int x, int y) const { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
  bool same_size(const FlowField& o) const { return width == o.width && height == o.height; }
};

// Marks pixels of a FlowField that received no information (true = hole).
struct HoleMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  HoleMask() = default;
  HoleMask(int w, int h, bool fill = false) : width(w), height(h) {
    if (w <= 0 || h <= 0)
      throw std::invalid_argument("HoleMask: bad dimensions");
    data.assign(static_cast<size_t>(w) * h, fill ? 1 : 0);
  }

  bool at(int x, int y) const { return data[static_cast<size_t>(y) * width + x] != 0; }
  bool is_hole(int x, int y) const { return at(x, y); }
  void set(int x, int y, bool b) { data[static_cast<size_t>(y) * width + x] = b ? 1 : 0; }
  bool any() const {
    for (uint8_t b : data)
      if (b) return true;
    return false;
  }
};

// Unconstrained H×W scalar plane (luma, weights, scores, masks).
struct ScalarField {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ScalarField() = default;
  ScalarField(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w <= 0 || h <= 0)
      throw std::invalid_argument("ScalarField: bad dimensions");
    data.assign(static_cast<size_t>(w) * h, fill);
  }

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

inline void clamp01(Image& img) {
  for (double& s : img.data) s = std::clamp(s, 0.0, 1.0);
}

// Rec.601 weights; single-channel images pass through.
inline double luma(const Image& img, int x, int y) {
  if (img.channels == 1) return img.at(x, y, 0);
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
         0.114 * img.at(x, y, 2);
}

inline ScalarField luma(const Image& img) {
  ScalarField out(img.width, img.height);
  const size_t n = static_cast<size_t>(img.width) * img.height;
  if (img.channels == 1) {
    out.data.assign(img.data.begin(), img.data.end());
  } else {
    for (size_t i = 0; i < n; ++i) {
      const double* p = &img.data[i * 3];
      out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  return out;
}

// Clamp-to-edge bilinear sample.
inline double sample_bilinear(const ScalarField& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int x1 = std::min(x0 + 1, f.width - 1);
  int y1 = std::min(y0 + 1, f.height - 1);
  double fx = x - x0, fy = y - y0;
  double top = f.at(x0, y0) * (1.0 - fx) + f.at(x1, y0) * fx;
  double bot = f.at(x0, y1) * (1.0 - fx) + f.at(x1, y1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

inline double sample_bilinear(const Image& img, double x, double y, int c) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = x - x0, fy = y - y0;
  double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
  double bot = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
  return top * (1.0 - fy) + bot * fy;
}

// 2x2 box average, clamping on odd edges. Shared by the pyramid builders.
inline ScalarField downsample_half(const ScalarField& in) {
  ScalarField out((in.width + 1) / 2, (in.height + 1) / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int x0 = 2 * x, y0 = 2 * y;
      const int x1 = std::min(x0 + 1, in.width - 1), y1 = std::min(y0 + 1, in.height - 1);
      out.at(x, y) = 0.25 * (in.at(x0, y0) + in.at(x1, y0) + in.at(x0, y1) + in.at(x1, y1));
    }
  }
  return out;
}

inline void require_finite(const FlowField& f, const char* who) {
  for (double c : f.data)
    if (!std::isfinite(c)) throw std::runtime_error(std::string(who) + ": non-finite flow component");
}

}  // namespace quadflow
