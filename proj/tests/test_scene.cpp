#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "quadflow/quadratic_motion.hpp"
#include "quadflow/scene.hpp"

using namespace quadflow;

namespace {

SceneSpec accelerating_blob() {
  SceneSpec scene;
  scene.width = 40;
  scene.height = 24;
  Sprite s;
  s.kind = SpriteKind::GaussianBlob;
  s.p0x = 10;
  s.p0y = 10;
  s.vx = 4;
  s.vy = 0;
  s.ax = 2;
  s.ay = 0;
  s.sigma = 1.0;
  scene.sprites.push_back(s);
  return scene;
}

}  // namespace

TEST_CASE("rendered blob centroid follows the kinematics") {
  const SceneSpec scene = accelerating_blob();
  struct Expect {
    double t, x, y;
  };
  // p(t) = 10 + 4t + t^2
  for (const Expect& e : {Expect{0.0, 10.0, 10.0}, Expect{1.0, 15.0, 10.0},
                          Expect{-1.0, 7.0, 10.0}}) {
    const Image img = render_frame(scene, e.t);
    double cx = 0.0, cy = 0.0;
    REQUIRE(intensity_centroid(img, e.x, e.y, 6.0, scene.background, cx, cy));
    REQUIRE(std::abs(cx - e.x) <= 0.05);
    REQUIRE(std::abs(cy - e.y) <= 0.05);
  }
}

TEST_CASE("analytic flow endpoints carry v plus-minus half acceleration") {
  const SceneSpec scene = accelerating_blob();
  const FlowField f01 = analytic_flow(scene, 0.0, 1.0);
  const FlowField f0m1 = analytic_flow(scene, 0.0, -1.0);
  REQUIRE(f01.u(10, 10) == 5.0);  // v + a/2
  REQUIRE(f01.v(10, 10) == 0.0);
  REQUIRE(f0m1.u(10, 10) == -3.0);  // -v + a/2
  REQUIRE(f0m1.v(10, 10) == 0.0);
  REQUIRE(f01.u(0, 0) == 0.0);  // background

  const QuadraticMotion qm = fit_quadratic(f01, f0m1);
  const FlowField mid = predict_flow(qm, 0.5);
  REQUIRE(mid.u(10, 10) == Catch::Approx(2.25).margin(1e-12));
  REQUIRE(mid.v(10, 10) == 0.0);
}

TEST_CASE("static scene renders identical frames") {
  SceneSpec scene;
  scene.width = 32;
  scene.height = 32;
  Sprite s;
  s.kind = SpriteKind::TexturedDisc;
  s.p0x = 16;
  s.p0y = 16;
  s.radius = 4.0;
  s.seed = 5;
  scene.sprites.push_back(s);
  const QuartetRender q = render_quartet_with_targets(scene, uniform_target_times(3));
  REQUIRE(q.frame_m1.data == q.frame_0.data);
  REQUIRE(q.frame_1.data == q.frame_0.data);
  REQUIRE(q.frame_2.data == q.frame_0.data);
  for (const auto& [t, img] : q.targets) REQUIRE(img.data == q.frame_0.data);
  for (double c : q.f01.data) REQUIRE(c == 0.0);
}

TEST_CASE("seeded disc renders are bit-identical, seeds change the texture") {
  SceneSpec scene;
  scene.width = 48;
  scene.height = 40;
  Sprite s;
  s.kind = SpriteKind::TexturedDisc;
  s.p0x = 20;
  s.p0y = 20;
  s.radius = 5.0;
  s.seed = 9;
  scene.sprites.push_back(s);
  const Image a = render_frame(scene, 0.0);
  const Image b = render_frame(scene, 0.0);
  REQUIRE(a.data == b.data);
  scene.sprites[0].seed = 10;
  const Image c = render_frame(scene, 0.0);
  REQUIRE(a.data != c.data);
}

TEST_CASE("textured disc centroid sits on its center") {
  SceneSpec scene;
  scene.width = 48;
  scene.height = 40;
  Sprite s;
  s.kind = SpriteKind::TexturedDisc;
  s.p0x = 20;
  s.p0y = 18;
  s.radius = 5.0;
  s.seed = 21;
  scene.sprites.push_back(s);
  const Image img = render_frame(scene, 0.0);
  double cx = 0.0, cy = 0.0;
  REQUIRE(intensity_centroid(img, 20, 18, 8.0, 0.0, cx, cy));
  REQUIRE(std::abs(cx - 20.0) <= 0.05);
  REQUIRE(std::abs(cy - 18.0) <= 0.05);
}

TEST_CASE("uniform target times split the unit interval") {
  const auto ts = uniform_target_times(7);
  REQUIRE(ts.size() == 7);
  REQUIRE(ts.front() == Catch::Approx(0.125).margin(1e-15));
  REQUIRE(ts.back() == Catch::Approx(0.875).margin(1e-15));
  REQUIRE(ts[3] == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("sprite too close to the edge is rejected") {
  SceneSpec scene;
  scene.width = 16;
  scene.height = 16;
  Sprite s;
  s.p0x = 3;  // 2x extent = 6 > 3
  s.p0y = 8;
  s.sigma = 1.0;
  scene.sprites.push_back(s);
  REQUIRE_THROWS_AS(render_frame(scene, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(analytic_flow(scene, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("overlapping sprite supports fail the analytic flow oracle") {
  SceneSpec scene;
  scene.width = 64;
  scene.height = 64;
  Sprite a;
  a.p0x = 32;
  a.p0y = 32;
  a.sigma = 2.0;
  Sprite b = a;
  b.p0x = 34;
  scene.sprites = {a, b};
  REQUIRE_THROWS_AS(analytic_flow(scene, 0.0, 1.0), std::runtime_error);
}

TEST_CASE("scene text round trips through parse and format") {
  const std::string text =
      "canvas 64 48\n"
      "background 0.1\n"
      "supersample 4\n"
      "# a comment line\n"
      "sprite blob 20 20 1.5 0 0.5 0 2\n"
      "sprite disc 44 28 -1 0.25 0 0 6 77\n";
  const SceneSpec scene = parse_scene(text, "inline");
  REQUIRE(scene.width == 64);
  REQUIRE(scene.height == 48);
  REQUIRE(scene.background == 0.1);
  REQUIRE(scene.sprites.size() == 2);
  REQUIRE(scene.sprites[0].kind == SpriteKind::GaussianBlob);
  REQUIRE(scene.sprites[0].sigma == 2.0);
  REQUIRE(scene.sprites[1].kind == SpriteKind::TexturedDisc);
  REQUIRE(scene.sprites[1].radius == 6.0);
  REQUIRE(scene.sprites[1].seed == 77);

  const SceneSpec again = parse_scene(scene_to_string(scene), "rt");
  REQUIRE(again.sprites.size() == 2);
  REQUIRE(again.sprites[1].vx == scene.sprites[1].vx);
}

TEST_CASE("scene parse errors carry origin and line number") {
  try {
    parse_scene("canvas 32 32\nsprite cube 1 2 3 4 5 6 7\n", "bad.txt");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    REQUIRE(std::string(e.what()).find("bad.txt:2") != std::string::npos);
  }
  REQUIRE_THROWS(parse_scene("sprite blob 1 2 3 4 5 6 1\n", "noc"));
  REQUIRE_THROWS(parse_scene("canvas 0 5\n", "dims"));
  REQUIRE_THROWS(parse_scene("canvas 8 8\nwobble 3\n", "unk"));
  REQUIRE_THROWS(parse_scene("canvas 8 8\nsprite blob 4 4 0 0 0 0 -1\n", "sig"));
}
