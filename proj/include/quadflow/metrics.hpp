#pragma once

// Image quality metrics: PSNR, SSIM, and interpolation error (IE).
//
// All three operate on 8-bit-scaled samples (stored values times 255).
// PSNR and IE are computed over every channel; SSIM is computed on luma
// with an 11x11 Gaussian window and averaged over window centers that
// lie fully inside the image.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

struct QualityReport {
  double psnr = 0.0;  // dB, capped at 99
  double ssim = 0.0;
  double ie = 0.0;    // RMS difference in 8-bit units
};

namespace detail {

inline constexpr int ssim_window = 11;
inline constexpr int ssim_radius = ssim_window / 2;

inline std::vector<double> ssim_kernel() {
  std::vector<double> k(ssim_window);
  const double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < ssim_window; ++i) {
    const double d = i - ssim_radius;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Horizontal pass of the separable Gaussian; rows keep their length, each
// output is valid only where the window fits (callers only read those).
inline void blur_rows(const std::vector<double>& src, int w, int h,
                      const std::vector<double>& kernel,
                      std::vector<double>& dst) {
  dst.assign(src.size(), 0.0);
  parallel_rows(h, [&](int y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * w;
    double* out = dst.data() + static_cast<std::size_t>(y) * w;
    for (int x = ssim_radius; x < w - ssim_radius; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ssim_window; ++i)
        acc += kernel[i] * row[x - ssim_radius + i];
      out[x] = acc;
    }
  });
}

inline void blur_cols(const std::vector<double>& src, int w, int h,
                      const std::vector<double>& kernel,
                      std::vector<double>& dst) {
  dst.assign(src.size(), 0.0);
  parallel_rows(h - 2 * ssim_radius, [&](int yy) {
    const int y = yy + ssim_radius;
    double* out = dst.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ssim_window; ++i)
        acc += kernel[i] *
               src[static_cast<std::size_t>(y - ssim_radius + i) * w + x];
      out[x] = acc;
    }
  });
}

// Gaussian-weighted local mean, valid on the interior where the full
// 11x11 window fits.
inline std::vector<double> gaussian_blur(const std::vector<double>& src, int w,
                                         int h,
                                         const std::vector<double>& kernel) {
  std::vector<double> tmp, dst;
  blur_rows(src, w, h, kernel, tmp);
  blur_cols(tmp, w, h, kernel, dst);
  return dst;
}

}  // namespace detail

// Mean structural similarity between two images of equal shape.
// Throws std::invalid_argument when shapes differ or either dimension is
// smaller than the 11x11 window.
inline double compute_ssim(const Image& reference, const Image& prediction) {
  if (!reference.same_size(prediction))
    throw std::invalid_argument("ssim: image dimensions differ");
  const int w = reference.width;
  const int h = reference.height;
  if (w < detail::ssim_window || h < detail::ssim_window)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      a[i] = luma(reference, x, y) * 255.0;
      b[i] = luma(prediction, x, y) * 255.0;
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
  }

  const auto kernel = detail::ssim_kernel();
  const auto mu_a = detail::gaussian_blur(a, w, h, kernel);
  const auto mu_b = detail::gaussian_blur(b, w, h, kernel);
  const auto m_aa = detail::gaussian_blur(aa, w, h, kernel);
  const auto m_bb = detail::gaussian_blur(bb, w, h, kernel);
  const auto m_ab = detail::gaussian_blur(ab, w, h, kernel);

  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

  double sum = 0.0;
  std::size_t count = 0;
  for (int y = detail::ssim_radius; y < h - detail::ssim_radius; ++y) {
    for (int x = detail::ssim_radius; x < w - detail::ssim_radius; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double va = m_aa[i] - ma * ma;
      const double vb = m_bb[i] - mb * mb;
      const double cov = m_ab[i] - ma * mb;
      const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      sum += num / den;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

// PSNR, SSIM, and IE for a prediction against its reference.
inline QualityReport compute_quality(const Image& reference,
                                     const Image& prediction) {
  if (!reference.same_size(prediction) ||
      reference.channels != prediction.channels)
    throw std::invalid_argument("compute_quality: image shapes differ");

  double se = 0.0;
  for (std::size_t i = 0; i < reference.data.size(); ++i) {
    const double d = (reference.data[i] - prediction.data[i]) * 255.0;
    se += d * d;
  }
  const double mse = se / static_cast<double>(reference.data.size());

  QualityReport r;
  r.ie = std::sqrt(mse);
  r.psnr = mse < 1e-10 ? 99.0 : 10.0 * std::log10(255.0 * 255.0 / mse);
  r.ssim = compute_ssim(reference, prediction);
  return r;
}

}  // namespace quadflow
