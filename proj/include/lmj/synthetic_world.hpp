#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "lmj/vae.hpp"

namespace lmj {

enum class Trajectory { kLoopCw, kLoopCcw, kStop, kDetour };

std::string_view trajectory_name(Trajectory t);
Trajectory parse_trajectory(std::string_view name);

struct Segment {
  Trajectory kind = Trajectory::kLoopCw;
  std::size_t length = 0;
};

/// A bright dot travelling a rectangular loop inset `margin` pixels from the
/// border. Phase is arc length along the loop, clockwise on screen starting
/// at the top-left corner.
struct ScenarioSpec {
  std::size_t width = 16;
  std::size_t height = 16;
  std::vector<Segment> segments;
  double dot_radius = 2.0;
  double noise_sigma = 0.02;
  std::uint64_t seed = 1;
  double margin = 3.0;
  double speed = 0.8;  // pixels per frame along the loop
  double detour_depth = 3.0;
  double start_phase = 0.0;

  std::size_t total_length() const;
  /// Throws InvalidInput for an empty or degenerate spec.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Scenario {
  std::vector<Frame> frames;
  std::vector<bool> abnormal;  // true on every frame outside loop_cw segments
  std::vector<Point> positions;
};

double loop_perimeter(const ScenarioSpec& spec);
Point loop_position(const ScenarioSpec& spec, double phase);

/// Dot centres only, without rendering. Throws InvalidInput if the dot leaves the frame.
std::vector<Point> trajectory(const ScenarioSpec& spec);

/// Deterministic from spec.seed.
Scenario generate(const ScenarioSpec& spec);

/// Named scenario layouts: "train", "stop", "avoid", "uturn".
ScenarioSpec preset(std::string_view name, std::uint64_t seed);

}  // namespace lmj
