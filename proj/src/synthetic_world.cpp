#include "lmj/synthetic_world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lmj/error.hpp"
#include "lmj/rng.hpp"

namespace lmj {

std::string_view trajectory_name(Trajectory t) {
  switch (t) {
    case Trajectory::kLoopCw:
      return "loop_cw";
    case Trajectory::kLoopCcw:
      return "loop_ccw";
    case Trajectory::kStop:
      return "stop";
    case Trajectory::kDetour:
      return "detour";
  }
  return "loop_cw";
}

Trajectory parse_trajectory(std::string_view name) {
  if (name == "loop_cw") return Trajectory::kLoopCw;
  if (name == "loop_ccw") return Trajectory::kLoopCcw;
  if (name == "stop") return Trajectory::kStop;
  if (name == "detour") return Trajectory::kDetour;
  throw InvalidInput("unknown trajectory kind '" + std::string(name) + "'");
}

std::size_t ScenarioSpec::total_length() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.length;
  return n;
}

void ScenarioSpec::validate() const {
  if (width == 0 || height == 0) throw InvalidInput("scenario: frame size must be positive");
  if (segments.empty()) throw InvalidInput("scenario: no segments");
  for (const auto& s : segments)
    if (s.length == 0) throw InvalidInput("scenario: empty segment");
  if (total_length() < 2) throw InvalidInput("scenario: need at least 2 frames");
  if (!(dot_radius > 0.0)) throw InvalidInput("scenario: dot radius must be positive");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("scenario: noise sigma must be >= 0");
  const double side = std::min(width, height);
  if (!(2.0 * margin < side - 1.0)) throw InvalidInput("scenario: loop margin too large");
}

double loop_perimeter(const ScenarioSpec& spec) {
  const double w = static_cast<double>(spec.width) - 1.0 - 2.0 * spec.margin;
  const double h = static_cast<double>(spec.height) - 1.0 - 2.0 * spec.margin;
  return 2.0 * (w + h);
}

Point loop_position(const ScenarioSpec& spec, double phase) {
  const double left = spec.margin;
  const double top = spec.margin;
  const double w = static_cast<double>(spec.width) - 1.0 - 2.0 * spec.margin;
  const double h = static_cast<double>(spec.height) - 1.0 - 2.0 * spec.margin;
  const double perimeter = 2.0 * (w + h);
  double s = std::fmod(phase, perimeter);
  if (s < 0.0) s += perimeter;
  if (s < w) return {left + s, top};
  s -= w;
  if (s < h) return {left + w, top + s};
  s -= h;
  if (s < w) return {left + w - s, top + h};
  s -= w;
  return {left, top + h - s};
}

std::vector<Point> trajectory(const ScenarioSpec& spec) {
  spec.validate();
  const Point centre{(static_cast<double>(spec.width) - 1.0) / 2.0,
                     (static_cast<double>(spec.height) - 1.0) / 2.0};
  std::vector<Point> out;
  out.reserve(spec.total_length());
  double phase = spec.start_phase;
  bool first = true;
  for (const Segment& seg : spec.segments) {
    for (std::size_t t = 0; t < seg.length; ++t) {
      // The opening frame of the sequence sits at the start phase.
      const double step = first ? 0.0 : spec.speed;
      first = false;
      Point p;
      switch (seg.kind) {
        case Trajectory::kLoopCw:
          phase += step;
          p = loop_position(spec, phase);
          break;
        case Trajectory::kLoopCcw:
          phase -= step;
          p = loop_position(spec, phase);
          break;
        case Trajectory::kStop:
          p = loop_position(spec, phase);
          break;
        case Trajectory::kDetour: {
          phase += step;
          p = loop_position(spec, phase);
          const double profile =
              std::sin(std::numbers::pi * static_cast<double>(t + 1) /
                       static_cast<double>(seg.length + 1));
          const double dx = centre.x - p.x;
          const double dy = centre.y - p.y;
          const double norm = std::hypot(dx, dy);
          if (norm > 0.0) {
            p.x += spec.detour_depth * profile * dx / norm;
            p.y += spec.detour_depth * profile * dy / norm;
          }
          break;
        }
      }
      if (p.x < 0.0 || p.y < 0.0 || p.x > static_cast<double>(spec.width) - 1.0 ||
          p.y > static_cast<double>(spec.height) - 1.0)
        throw InvalidInput("scenario: dot leaves the frame at step " + std::to_string(out.size()));
      out.push_back(p);
    }
  }
  return out;
}

Scenario generate(const ScenarioSpec& spec) {
  Scenario sc;
  sc.positions = trajectory(spec);
  Rng rng(spec.seed);
  const double inv_two_r2 = 1.0 / (2.0 * spec.dot_radius * spec.dot_radius);
  for (const Segment& seg : spec.segments)
    for (std::size_t t = 0; t < seg.length; ++t) sc.abnormal.push_back(seg.kind != Trajectory::kLoopCw);

  sc.frames.reserve(sc.positions.size());
  for (const Point& c : sc.positions) {
    Frame f{spec.width, spec.height, std::vector<double>(spec.width * spec.height)};
    for (std::size_t r = 0; r < spec.height; ++r) {
      for (std::size_t col = 0; col < spec.width; ++col) {
        const double dx = static_cast<double>(col) - c.x;
        const double dy = static_cast<double>(r) - c.y;
        double v = std::exp(-(dx * dx + dy * dy) * inv_two_r2);
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
        f.pixels[r * spec.width + col] = std::clamp(v, 0.0, 1.0);
      }
    }
    sc.frames.push_back(std::move(f));
  }
  return sc;
}

ScenarioSpec preset(std::string_view name, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  using T = Trajectory;
  if (name == "train") {
    spec.segments = {{T::kLoopCw, 600}};
  } else if (name == "stop") {
    spec.segments = {{T::kLoopCw, 150}, {T::kStop, 40}, {T::kLoopCw, 110}};
  } else if (name == "avoid") {
    spec.segments = {{T::kLoopCw, 150}, {T::kDetour, 30}, {T::kLoopCw, 120}};
  } else if (name == "uturn") {
    spec.segments = {{T::kLoopCw, 150}, {T::kLoopCcw, 150}};
  } else {
    throw InvalidInput("unknown preset '" + std::string(name) +
                       "' (expected train, stop, avoid or uturn)");
  }
  return spec;
}

}  // namespace lmj
