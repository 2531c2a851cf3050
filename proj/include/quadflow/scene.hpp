#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "quadflow/image.hpp"
#include "quadflow/parallel.hpp"

namespace quadflow {

// Deterministic lattice hash -> [0,1). Stable across platforms and runs.
inline double lattice_hash(int x, int y, uint32_t seed) {
  uint32_t h = static_cast<uint32_t>(x) * 0x8da6b343u ^ static_cast<uint32_t>(y) * 0xd8163841u ^
               (seed + 0x9e3779b9u) * 0xcb1ab31fu;
  h ^= h >> 13;
  h *= 0x7feb352du;
  h ^= h >> 15;
  h *= 0x846ca68bu;
  h ^= h >> 16;
  return (h & 0xffffffu) / static_cast<double>(0x1000000);
}

inline double smooth01(double t) { return t * t * (3.0 - 2.0 * t); }

// Single octave of smoothstep-interpolated value noise.
inline double value_noise(double x, double y, double scale, uint32_t seed) {
  const double fx = x / scale, fy = y / scale;
  const double flx = std::floor(fx), fly = std::floor(fy);
  const int x0 = static_cast<int>(flx), y0 = static_cast<int>(fly);
  const double tx = smooth01(fx - flx), ty = smooth01(fy - fly);
  const double v00 = lattice_hash(x0, y0, seed), v10 = lattice_hash(x0 + 1, y0, seed);
  const double v01 = lattice_hash(x0, y0 + 1, seed), v11 = lattice_hash(x0 + 1, y0 + 1, seed);
  const double top = v00 * (1.0 - tx) + v10 * tx;
  const double bot = v01 * (1.0 - tx) + v11 * tx;
  return top * (1.0 - ty) + bot * ty;
}

// Three octaves, result in [0,1].
inline double fractal_noise(double x, double y, uint32_t seed) {
  return 0.5 * value_noise(x, y, 8.0, seed) + 0.3 * value_noise(x, y, 4.0, seed + 101u) +
         0.2 * value_noise(x, y, 2.0, seed + 202u);
}

enum class SpriteKind { GaussianBlob, TexturedDisc };

// Rigidly translating sprite with position p(t) = p0 + v*t + a*t^2/2.
struct Sprite {
  SpriteKind kind = SpriteKind::GaussianBlob;
  double p0x = 0, p0y = 0;
  double vx = 0, vy = 0;
  double ax = 0, ay = 0;
  double sigma = 3.0;   // blob
  double radius = 8.0;  // disc
  uint32_t seed = 1;    // disc texture

  double x_at(double t) const { return p0x + vx * t + 0.5 * ax * t * t; }
  double y_at(double t) const { return p0y + vy * t + 0.5 * ay * t * t; }

  // Distance from center beyond which the sprite is treated as absent.
  double extent() const {
    return kind == SpriteKind::GaussianBlob ? 3.0 * sigma : radius + disc_feather;
  }

  static constexpr double disc_feather = 1.5;  // soft-edge width in pixels

  // Coverage weight at offset (dx,dy) from the sprite center.
  double weight(double dx, double dy) const {
    const double r2 = dx * dx + dy * dy;
    if (kind == SpriteKind::GaussianBlob) return std::exp(-r2 / (2.0 * sigma * sigma));
    const double r = std::sqrt(r2);
    if (r >= radius) return 0.0;
    if (r <= radius - disc_feather) return 1.0;
    return smooth01((radius - r) / disc_feather);
  }

  // Intensity at offset from center. The disc texture is symmetrized,
  // tex(-d) = tex(d), so the intensity centroid sits exactly on the center.
  double value(double dx, double dy) const {
    if (kind == SpriteKind::GaussianBlob) return 1.0;
    const double n = 0.5 * (fractal_noise(dx, dy, seed) + fractal_noise(-dx, -dy, seed));
    return 0.25 + 0.75 * n;
  }
};

struct SceneSpec {
  int width = 128;
  int height = 96;
  double background = 0.0;
  int supersample = 4;
  std::vector<Sprite> sprites;
};

// Margin rule for oracle scenes: every sprite keeps twice its extent of
// clearance from all canvas edges at time t.
inline bool scene_valid_at(const SceneSpec& scene, double t) {
  for (const Sprite& s : scene.sprites) {
    const double m = 2.0 * s.extent();
    const double x = s.x_at(t), y = s.y_at(t);
    if (x - m < 0.0 || x + m > scene.width - 1 || y - m < 0.0 || y + m > scene.height - 1)
      return false;
  }
  return true;
}

inline Image render_frame(const SceneSpec& scene, double t) {
  if (scene.supersample < 1)
    throw std::invalid_argument("render_frame: supersample factor must be >= 1");
  if (!scene_valid_at(scene, t))
    throw std::invalid_argument("render_frame: sprite violates 2x-extent margin at t=" +
                                std::to_string(t));
  Image img(scene.width, scene.height, 1, scene.background);
  const int ss = scene.supersample;
  const double inv_ss = 1.0 / ss;

  for (const Sprite& s : scene.sprites) {
    const double cx = s.x_at(t), cy = s.y_at(t);
    const double reach = s.extent() + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x1 = std::min(scene.width - 1, static_cast<int>(std::ceil(cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y1 = std::min(scene.height - 1, static_cast<int>(std::ceil(cy + reach)));
    parallel_rows(y1 - y0 + 1, [&](int row) {
      const int y = y0 + row;
      for (int x = x0; x <= x1; ++x) {
        double acc = 0.0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const double qx = x + (sx + 0.5) * inv_ss - 0.5;
            const double qy = y + (sy + 0.5) * inv_ss - 0.5;
            const double dx = qx - cx, dy = qy - cy;
            const double wgt = s.weight(dx, dy);
            double sample = img.at(x, y);  // background (sprites never overlap)
            if (wgt > 0.0) sample = sample * (1.0 - wgt) + s.value(dx, dy) * wgt;
            acc += sample;
          }
        }
        img.at(x, y) = std::clamp(acc * inv_ss * inv_ss, 0.0, 1.0);
      }
    });
  }
  return img;
}

// Exact displacement p(t1)-p(t0) painted over each sprite's support at t0
// (pixels with coverage weight > 0.01); zero over the background. Throws if
// two sprite supports overlap, which oracle scenes must not do.
inline FlowField analytic_flow(const SceneSpec& scene, double t0, double t1) {
  if (!scene_valid_at(scene, t0) || !scene_valid_at(scene, t1))
    throw std::invalid_argument("analytic_flow: sprite violates margin");
  FlowField flow(scene.width, scene.height);
  std::vector<uint8_t> owner(static_cast<size_t>(scene.width) * scene.height, 0);
  for (size_t si = 0; si < scene.sprites.size(); ++si) {
    const Sprite& s = scene.sprites[si];
    const double cx = s.x_at(t0), cy = s.y_at(t0);
    const double du = s.x_at(t1) - cx, dv = s.y_at(t1) - cy;
    const double reach = s.extent() + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x1 = std::min(scene.width - 1, static_cast<int>(std::ceil(cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y1 = std::min(scene.height - 1, static_cast<int>(std::ceil(cy + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (s.weight(x - cx, y - cy) > 0.01) {
          size_t idx = static_cast<size_t>(y) * scene.width + x;
          if (owner[idx])
            throw std::runtime_error("analytic_flow: overlapping sprite supports at pixel (" +
                                     std::to_string(x) + "," + std::to_string(y) + ")");
          owner[idx] = static_cast<uint8_t>(si + 1);
          flow.u(x, y) = du;
          flow.v(x, y) = dv;
        }
      }
    }
  }
  return flow;
}

struct QuartetRender {
  Image frame_m1, frame_0, frame_1, frame_2;  // times -1, 0, 1, 2
  std::vector<std::pair<double, Image>> targets;
  FlowField f01, f0m1, f10, f12;  // analytic ground-truth flows
};

inline QuartetRender render_quartet_with_targets(const SceneSpec& scene,
                                                 const std::vector<double>& target_times) {
  QuartetRender q;
  q.frame_m1 = render_frame(scene, -1.0);
  q.frame_0 = render_frame(scene, 0.0);
  q.frame_1 = render_frame(scene, 1.0);
  q.frame_2 = render_frame(scene, 2.0);
  for (double t : target_times) q.targets.emplace_back(t, render_frame(scene, t));
  q.f01 = analytic_flow(scene, 0.0, 1.0);
  q.f0m1 = analytic_flow(scene, 0.0, -1.0);
  q.f10 = analytic_flow(scene, 1.0, 0.0);
  q.f12 = analytic_flow(scene, 1.0, 2.0);
  return q;
}

// Evenly spaced interior times i/(n+1), i=1..n; n=7 gives 0.125 ... 0.875.
inline std::vector<double> uniform_target_times(int n) {
  std::vector<double> ts;
  for (int i = 1; i <= n; ++i) ts.push_back(static_cast<double>(i) / (n + 1));
  return ts;
}

// Line-oriented scene description:
//   canvas W H
//   background V          (optional, default 0)
//   supersample N         (optional, default 4)
//   sprite blob X Y VX VY AX AY SIGMA
//   sprite disc X Y VX VY AX AY RADIUS SEED
// '#' starts a comment; blank lines are ignored.
inline SceneSpec parse_scene(const std::string& text, const std::string& origin = "<scene>") {
  SceneSpec scene;
  scene.sprites.clear();
  bool have_canvas = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (word == "canvas") {
      if (!(ls >> scene.width >> scene.height) || scene.width <= 0 || scene.height <= 0)
        throw std::runtime_error(where + ": canvas needs positive W H");
      have_canvas = true;
    } else if (word == "background") {
      if (!(ls >> scene.background) || scene.background < 0.0 || scene.background > 1.0)
        throw std::runtime_error(where + ": background needs a value in [0,1]");
    } else if (word == "supersample") {
      if (!(ls >> scene.supersample) || scene.supersample < 1)
        throw std::runtime_error(where + ": supersample needs a positive integer");
    } else if (word == "sprite") {
      Sprite s;
      std::string kind;
      if (!(ls >> kind >> s.p0x >> s.p0y >> s.vx >> s.vy >> s.ax >> s.ay))
        throw std::runtime_error(where + ": sprite needs kind p0x p0y vx vy ax ay params");
      if (kind == "blob") {
        s.kind = SpriteKind::GaussianBlob;
        if (!(ls >> s.sigma) || s.sigma <= 0.0)
          throw std::runtime_error(where + ": blob needs a positive sigma");
      } else if (kind == "disc") {
        s.kind = SpriteKind::TexturedDisc;
        long seed = 0;
        if (!(ls >> s.radius >> seed) || s.radius <= 0.0)
          throw std::runtime_error(where + ": disc needs radius and seed");
        s.seed = static_cast<uint32_t>(seed);
      } else {
        throw std::runtime_error(where + ": unknown sprite kind '" + kind + "'");
      }
      scene.sprites.push_back(s);
    } else {
      throw std::runtime_error(where + ": unknown directive '" + word + "'");
    }
  }
  if (!have_canvas) throw std::runtime_error(origin + ": missing canvas directive");
  return scene;
}

inline SceneSpec load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open scene file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path);
}

inline std::string scene_to_string(const SceneSpec& scene) {
  std::ostringstream out;
  out.precision(17);
  out << "canvas " << scene.width << " " << scene.height << "\n";
  out << "background " << scene.background << "\n";
  out << "supersample " << scene.supersample << "\n";
  for (const Sprite& s : scene.sprites) {
    out << "sprite " << (s.kind == SpriteKind::GaussianBlob ? "blob" : "disc") << " " << s.p0x
        << " " << s.p0y << " " << s.vx << " " << s.vy << " " << s.ax << " " << s.ay << " ";
    if (s.kind == SpriteKind::GaussianBlob)
      out << s.sigma;
    else
      out << s.radius << " " << s.seed;
    out << "\n";
  }
  return out.str();
}

// Intensity-weighted centroid of (luma - background)+ within a square window
// centered at (cx, cy). Returns false if the window holds no mass.
inline bool intensity_centroid(const Image& img, double cx, double cy, double window_radius,
                               double background, double& out_x, double& out_y) {
  const ScalarField y_plane = luma(img);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - window_radius)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + window_radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - window_radius)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + window_radius)));
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double w = std::max(0.0, y_plane.at(x, y) - background);
      mass += w;
      mx += w * x;
      my += w * y;
    }
  }
  if (mass <= 0.0) return false;
  out_x = mx / mass;
  out_y = my / mass;
  return true;
}

}  // namespace quadflow
