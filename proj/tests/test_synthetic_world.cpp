#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "lmj/error.hpp"
#include "lmj/synthetic_world.hpp"

using namespace lmj;

namespace {

ScenarioSpec clean(std::vector<Segment> segs) {
  ScenarioSpec s;
  s.segments = std::move(segs);
  s.noise_sigma = 0.0;
  return s;
}

std::size_t argmax(const Frame& f) {
  return static_cast<std::size_t>(std::max_element(f.pixels.begin(), f.pixels.end()) - f.pixels.begin());
}

}  // namespace

TEST_CASE("loop geometry") {
  const ScenarioSpec s;  // 16x16, margin 3: side 9
  CHECK(loop_perimeter(s) == 36.0);
  CHECK(loop_position(s, 0.0) == Point{3, 3});
  CHECK(loop_position(s, 9.0) == Point{12, 3});
  CHECK(loop_position(s, 18.0) == Point{12, 12});
  CHECK(loop_position(s, 27.0) == Point{3, 12});
  CHECK(loop_position(s, 36.0) == Point{3, 3});
  CHECK(loop_position(s, -9.0) == Point{3, 12});
}

TEST_CASE("stop segment keeps the dot still") {
  const auto sc = generate(clean({{Trajectory::kLoopCw, 5}, {Trajectory::kStop, 6}}));
  for (std::size_t i = 5; i < 11; ++i) {
    CHECK(sc.positions[i] == sc.positions[4]);
    CHECK(argmax(sc.frames[i]) == argmax(sc.frames[4]));
    CHECK(sc.frames[i] == sc.frames[4]);
  }
}

TEST_CASE("pure clockwise scenario has no abnormal frames") {
  const auto sc = generate(clean({{Trajectory::kLoopCw, 50}}));
  CHECK(sc.abnormal.size() == 50);
  CHECK(std::none_of(sc.abnormal.begin(), sc.abnormal.end(), [](bool b) { return b; }));
  for (std::size_t i = 1; i < sc.positions.size(); ++i) {
    const double d = std::hypot(sc.positions[i].x - sc.positions[i - 1].x,
                                sc.positions[i].y - sc.positions[i - 1].y);
    CHECK(d <= 0.8 + 1e-12);
  }
}

TEST_CASE("counter-clockwise is clockwise reversed") {
  const std::size_t n = 60;
  const auto cw = generate(clean({{Trajectory::kLoopCw, n}}));
  auto spec = clean({{Trajectory::kLoopCcw, n}});
  spec.start_phase = static_cast<double>(n - 1) * spec.speed;
  const auto ccw = generate(spec);
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = cw.positions[n - 1 - i], b = ccw.positions[i];
    CHECK(std::abs(a.x - b.x) < 1e-9);
    CHECK(std::abs(a.y - b.y) < 1e-9);
  }
  CHECK(std::all_of(ccw.abnormal.begin(), ccw.abnormal.end(), [](bool b) { return b; }));
}

TEST_CASE("detour bends inward and returns") {
  const auto sc = generate(clean({{Trajectory::kLoopCw, 10}, {Trajectory::kDetour, 9}, {Trajectory::kLoopCw, 5}}));
  ScenarioSpec base = clean({{Trajectory::kLoopCw, 24}});
  const auto ref = trajectory(base);
  // mid-detour sits detour_depth closer to the centre
  const Point c{7.5, 7.5};
  auto dist = [&](Point p) { return std::hypot(p.x - c.x, p.y - c.y); };
  CHECK(dist(sc.positions[14]) == doctest::Approx(dist(ref[14]) - 3.0));
  CHECK(sc.positions[20] == ref[20]);
  for (std::size_t i = 10; i < 19; ++i) CHECK(sc.abnormal[i]);
  CHECK_FALSE(sc.abnormal[19]);
}

TEST_CASE("pixels, labels and determinism") {
  const auto spec = preset("stop", 3);
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.frames == b.frames);
  CHECK(a.abnormal == b.abnormal);
  CHECK(a.frames.size() == spec.total_length());
  CHECK(a.abnormal.size() == a.frames.size());
  for (const auto& f : a.frames) {
    CHECK(f.width == 16);
    CHECK(f.pixels.size() == 256);
    for (double v : f.pixels) CHECK((v >= 0.0 && v <= 1.0));
  }
  CHECK(generate(preset("stop", 4)).frames != a.frames);
}

TEST_CASE("presets") {
  CHECK(preset("train", 1).total_length() == 600);
  CHECK(preset("stop", 1).total_length() == 300);
  CHECK(preset("avoid", 1).total_length() == 300);
  CHECK(preset("uturn", 1).total_length() == 300);
  CHECK_THROWS_AS(preset("spin", 1), InvalidInput);
  for (auto t : {Trajectory::kLoopCw, Trajectory::kLoopCcw, Trajectory::kStop, Trajectory::kDetour})
    CHECK(parse_trajectory(trajectory_name(t)) == t);
  CHECK_THROWS_AS(parse_trajectory("zigzag"), InvalidInput);
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(generate(clean({})), InvalidInput);
  CHECK_THROWS_AS(generate(clean({{Trajectory::kLoopCw, 1}})), InvalidInput);
  CHECK_THROWS_AS(generate(clean({{Trajectory::kLoopCw, 0}, {Trajectory::kLoopCw, 5}})), InvalidInput);
  auto s = clean({{Trajectory::kLoopCw, 5}});
  s.margin = 8.0;
  CHECK_THROWS_AS(generate(s), InvalidInput);
  s = clean({{Trajectory::kLoopCw, 5}});
  s.margin = 0.0;
  s.detour_depth = -3.0;  // outward detour from the border leaves the frame
  s.segments = {{Trajectory::kDetour, 5}};
  CHECK_THROWS_AS(generate(s), InvalidInput);
  s = clean({{Trajectory::kLoopCw, 5}});
  s.dot_radius = 0.0;
  CHECK_THROWS_AS(generate(s), InvalidInput);
}
