#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quadflow/flow_provider.hpp"
#include "quadflow/horn_schunck.hpp"
#include "quadflow/parallel.hpp"
#include "quadflow/scene.hpp"
#include "test_util.hpp"

using namespace quadflow;
using testutil::TempDir;

namespace {

// Band-limited periodic pattern; shifting the phase by integers is an exact
// cyclic translation, so there is no seam anywhere. The wave frequencies stay
// low enough that two rounds of 2x box downsampling do not alias them, and the
// spread of directions keeps the local gradient two-dimensional.
Image periodic_texture(int w, int h, double shift_x, double shift_y) {
  constexpr double tau = 2.0 * std::numbers::pi;
  struct Wave {
    int px, py;
    double phase;
  };
  static const Wave waves[] = {{3, 0, 0.7}, {0, 2, 1.1}, {2, 2, 2.0},
                               {3, -2, 0.4}, {1, 3, 2.9}, {4, 1, 1.7}};
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fx = (x - shift_x) / w;
      const double fy = (y - shift_y) / h;
      double s = 0.0;
      for (const Wave& wv : waves)
        s += std::sin(tau * (wv.px * fx + wv.py * fy) + wv.phase);
      img.at(x, y) = 0.5 + 0.07 * s;
    }
  }
  return img;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

}  // namespace

TEST_CASE("identical frames estimate to zero flow") {
  const Image img = periodic_texture(48, 36, 0, 0);
  const FlowField f = estimate_flow(img, img);
  for (double c : f.data) REQUIRE(std::abs(c) < 0.05);
}

TEST_CASE("flat frames estimate to zero flow") {
  const Image a(32, 32, 1, 0.4);
  const Image b(32, 32, 1, 0.4);
  const FlowField f = estimate_flow(a, b);
  for (double c : f.data) REQUIRE(std::abs(c) < 0.05);
}

TEST_CASE("cyclic translation is recovered to sub-pixel median error") {
  const Image i0 = periodic_texture(64, 48, 0, 0);
  const Image i1 = periodic_texture(64, 48, 3, 0);
  const FlowField f = estimate_flow(i0, i1);
  std::vector<double> du, dv;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      du.push_back(std::abs(f.u(x, y) - 3.0));
      dv.push_back(std::abs(f.v(x, y)));
    }
  }
  REQUIRE(median(du) <= 0.5);
  REQUIRE(median(dv) <= 0.5);
}

TEST_CASE("estimates commute with cyclic shifts away from borders") {
  const int w = 64, h = 48, sx = 4, sy = 0;
  const Image a0 = periodic_texture(w, h, 0, 0);
  const Image a1 = periodic_texture(w, h, 2, 1);
  const Image b0 = periodic_texture(w, h, sx, sy);
  const Image b1 = periodic_texture(w, h, 2 + sx, 1 + sy);
  const FlowField fa = estimate_flow(a0, a1);
  const FlowField fb = estimate_flow(b0, b1);
  const int margin = 12;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      REQUIRE(std::abs(fb.u(x, y) - fa.u(x - sx, y - sy)) <= 0.1);
      REQUIRE(std::abs(fb.v(x, y) - fa.v(x - sx, y - sy)) <= 0.1);
    }
  }
}

TEST_CASE("synthetic quartet flow matches the analytic field on the sprite") {
  SceneSpec scene;
  scene.width = 96;
  scene.height = 72;
  Sprite s;
  s.kind = SpriteKind::TexturedDisc;
  s.p0x = 40;
  s.p0y = 36;
  s.vx = 3;
  s.vy = 0;
  s.ax = 1;
  s.ay = 0;
  s.radius = 6.0;
  s.seed = 3;
  scene.sprites.push_back(s);

  const Image i0 = render_frame(scene, 0.0);
  const Image i1 = render_frame(scene, 1.0);
  const FlowField est = estimate_flow(i0, i1);
  const FlowField truth = analytic_flow(scene, 0.0, 1.0);

  std::vector<double> err;
  const Sprite& sp = scene.sprites[0];
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      if (sp.weight(x - sp.p0x, y - sp.p0y) > 0.01)
        err.push_back(std::hypot(est.u(x, y) - truth.u(x, y),
                                 est.v(x, y) - truth.v(x, y)));
  REQUIRE_FALSE(err.empty());
  REQUIRE(median(err) <= 0.5);
}

TEST_CASE("files-mode provider returns stored flows verbatim") {
  TempDir dir("provider");
  const Image frame(16, 16, 1, 0.5);
  QuartetFlows want;
  want.f01 = testutil::random_flow(16, 16, 1);
  want.f0m1 = testutil::random_flow(16, 16, 2);
  want.f10 = testutil::random_flow(16, 16, 3);
  want.f12 = testutil::random_flow(16, 16, 4);
  write_flo(want.f01, dir.file("flow_0to1.flo"));
  write_flo(want.f0m1, dir.file("flow_0to-1.flo"));
  write_flo(want.f10, dir.file("flow_1to0.flo"));
  write_flo(want.f12, dir.file("flow_1to2.flo"));

  const FlowProvider provider =
      FlowProvider::files(dir.file("flow_{src}to{dst}.flo"));
  const QuartetFlows got = flows_for_quartet(provider, frame, frame, frame, frame);
  auto close = [](const FlowField& a, const FlowField& b) {
    REQUIRE(a.data.size() == b.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i)
      REQUIRE(a.data[i] == Catch::Approx(b.data[i]).margin(1e-6));
  };
  close(got.f01, want.f01);
  close(got.f0m1, want.f0m1);
  close(got.f10, want.f10);
  close(got.f12, want.f12);
}

TEST_CASE("provider errors name the failing pair") {
  TempDir dir("provider_err");
  const Image frame(8, 8, 1, 0.5);
  const FlowProvider provider =
      FlowProvider::files(dir.file("flow_{src}to{dst}.flo"));
  try {
    flows_for_quartet(provider, frame, frame, frame, frame);
    FAIL("expected missing-file error");
  } catch (const std::runtime_error& e) {
    REQUIRE(std::string(e.what()).find("flow 0->1") != std::string::npos);
  }
}

TEST_CASE("static quartet estimates to zero everywhere") {
  const Image img = periodic_texture(40, 32, 0, 0);
  const QuartetFlows q =
      flows_for_quartet(FlowProvider::estimator(), img, img, img, img);
  for (const FlowField* f : {&q.f01, &q.f0m1, &q.f10, &q.f12})
    for (double c : f->data) REQUIRE(std::abs(c) < 0.05);
}

TEST_CASE("estimator rejects bad inputs") {
  const Image small(8, 8, 1, 0.5);
  try {
    estimate_flow(small, small);  // 3 levels -> 2x2 coarsest
    FAIL("expected pyramid error");
  } catch (const std::invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("coarsest") != std::string::npos);
  }
  REQUIRE_THROWS_AS(estimate_flow(Image(16, 16, 1), Image(17, 16, 1)),
                    std::invalid_argument);
  HornSchunckParams bad;
  bad.alpha = 0.0;
  REQUIRE_THROWS_AS(estimate_flow(Image(16, 16, 1), Image(16, 16, 1), bad),
                    std::invalid_argument);
}

TEST_CASE("estimation is bit-identical across thread counts") {
  const Image i0 = periodic_texture(48, 40, 0, 0);
  const Image i1 = periodic_texture(48, 40, 2, 1);
  set_thread_count(1);
  const FlowField serial = estimate_flow(i0, i1);
  set_thread_count(4);
  const FlowField parallel = estimate_flow(i0, i1);
  set_thread_count(0);
  REQUIRE(serial.data == parallel.data);
}
