// Copyright 2026 The Planar WBC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wbc/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wbc {

namespace {

// Fixed-precision formatting keeps output byte-stable.
std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

class SvgCanvas {
 public:
  SvgCanvas(const Box& bounds, double scale, double margin)
      : bounds_(bounds), scale_(scale), margin_(margin) {}

  double X(double x) const { return (x - bounds_.lo.x) * scale_ + margin_; }
  double Y(double y) const { return (bounds_.hi.y - y) * scale_ + margin_; }
  double width() const { return bounds_.width() * scale_ + 2 * margin_; }
  double height() const { return bounds_.height() * scale_ + 2 * margin_; }
  double L(double meters) const { return meters * scale_; }

  std::string Point(const Vec2& p) const { return Num(X(p.x)) + "," + Num(Y(p.y)); }

 private:
  Box bounds_;
  double scale_;
  double margin_;
};

void Polyline(std::ostringstream& out, const SvgCanvas& c, std::span<const Vec2> points,
              const std::string& style) {
  if (points.size() < 2) return;
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (size_t i = 0; i < points.size(); ++i) out << (i ? " " : "") << c.Point(points[i]);
  out << "\"/>\n";
}

}  // namespace

std::string RenderSvg(const RobotConfig& robot, const Scene& scene, double tolerance,
                      std::span<const Vec2> path, std::span<const RobotState> trajectory,
                      const RenderOptions& options) {
  const WorldGeometry& w = scene.world;
  const SvgCanvas c(w.bounds, options.pixels_per_meter, 10.0);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(c.width())
      << "\" height=\"" << Num(c.height()) << "\" viewBox=\"0 0 " << Num(c.width()) << " "
      << Num(c.height()) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << Num(c.width()) << "\" height=\"" << Num(c.height())
      << "\" fill=\"white\"/>\n";
  for (const Box& b : w.boxes) {
    out << "<rect x=\"" << Num(c.X(b.lo.x)) << "\" y=\"" << Num(c.Y(b.hi.y)) << "\" width=\""
        << Num(c.L(b.width())) << "\" height=\"" << Num(c.L(b.height()))
        << "\" fill=\"#777777\"/>\n";
  }
  for (const Segment& s : w.segments) {
    out << "<line x1=\"" << Num(c.X(s.a.x)) << "\" y1=\"" << Num(c.Y(s.a.y)) << "\" x2=\""
        << Num(c.X(s.b.x)) << "\" y2=\"" << Num(c.Y(s.b.y))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  out << "<circle cx=\"" << Num(c.X(scene.goal.x)) << "\" cy=\"" << Num(c.Y(scene.goal.y))
      << "\" r=\"" << Num(c.L(tolerance))
      << "\" fill=\"#c8f0c8\" stroke=\"#208020\" stroke-width=\"1\"/>\n";
  Polyline(out, c, path, "stroke=\"#3060d0\" stroke-width=\"1.5\" stroke-dasharray=\"4,3\"");

  if (!trajectory.empty()) {
    std::vector<Vec2> base_trace;
    std::vector<Vec2> ee_trace;
    for (const RobotState& s : trajectory) {
      base_trace.push_back(s.base_pose.position());
      ee_trace.push_back(ForwardKinematics(robot, s).end_effector.position());
    }
    Polyline(out, c, base_trace, "stroke=\"#a0a0a0\" stroke-width=\"1\"");
    Polyline(out, c, ee_trace, "stroke=\"#d03030\" stroke-width=\"1.5\"");

    const RobotState& last = trajectory.back();
    if (options.lidar) {
      for (Sensor sensor : {Sensor::kFront, Sensor::kRear}) {
        const LidarScan scan = CastLidar(robot, last, w, sensor);
        const Vec2 origin = SensorOrigin(robot, last.base_pose, sensor);
        for (int i = 0; i < robot.lidar.beams; ++i) {
          const double a = BeamAngle(robot, last.base_pose, sensor, i);
          const Vec2 end = origin + Vec2{std::cos(a), std::sin(a)} * scan.ranges[i];
          out << "<line x1=\"" << Num(c.X(origin.x)) << "\" y1=\"" << Num(c.Y(origin.y))
              << "\" x2=\"" << Num(c.X(end.x)) << "\" y2=\"" << Num(c.Y(end.y))
              << "\" stroke=\"#f0b040\" stroke-width=\"0.5\"/>\n";
        }
      }
    }
    const ArmFrames frames = ForwardKinematics(robot, last);
    const Vec2 base = last.base_pose.position();
    out << "<circle cx=\"" << Num(c.X(base.x)) << "\" cy=\"" << Num(c.Y(base.y)) << "\" r=\""
        << Num(c.L(robot.base_radius))
        << "\" fill=\"#b0c4de\" stroke=\"#304060\" stroke-width=\"1\"/>\n";
    const Vec2 heading = base + Vec2{std::cos(last.base_pose.theta), std::sin(last.base_pose.theta)} *
                                    robot.base_radius;
    out << "<line x1=\"" << Num(c.X(base.x)) << "\" y1=\"" << Num(c.Y(base.y)) << "\" x2=\""
        << Num(c.X(heading.x)) << "\" y2=\"" << Num(c.Y(heading.y))
        << "\" stroke=\"#304060\" stroke-width=\"1\"/>\n";
    for (const Segment& link : frames.Links()) {
      out << "<line x1=\"" << Num(c.X(link.a.x)) << "\" y1=\"" << Num(c.Y(link.a.y))
          << "\" x2=\"" << Num(c.X(link.b.x)) << "\" y2=\"" << Num(c.Y(link.b.y))
          << "\" stroke=\"#e08030\" stroke-opacity=\"0.85\" stroke-linecap=\"round\" "
             "stroke-width=\""
          << Num(c.L(2.0 * robot.link_capsule_radius)) << "\"/>\n";
    }
    const Vec2 ee = frames.end_effector.position();
    out << "<circle cx=\"" << Num(c.X(ee.x)) << "\" cy=\"" << Num(c.Y(ee.y))
        << "\" r=\"2\" fill=\"#d03030\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string FieldToPgm(const GridField& field) {
  double min_positive = 1.0;
  for (size_t i = 0; i < field.kinds.size(); ++i) {
    if (field.kinds[i] == CellKind::kFree && field.attraction[i] > 0.0) {
      min_positive = std::min(min_positive, field.attraction[i]);
    }
  }
  const double log_min = std::log(min_positive);
  std::ostringstream out;
  out << "P5\n" << field.width << " " << field.height << "\n255\n";
  for (int iy = field.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < field.width; ++ix) {
      const int i = field.Index(ix, iy);
      unsigned char v = 0;
      if (field.kinds[i] == CellKind::kGoal) {
        v = 255;
      } else if (field.kinds[i] == CellKind::kFree) {
        const double a = field.attraction[i];
        double t = 0.0;
        if (a > 0.0 && log_min < 0.0) t = 1.0 - std::log(a) / log_min;
        v = static_cast<unsigned char>(1 + std::lround(std::clamp(t, 0.0, 1.0) * 253.0));
      }
      out.put(static_cast<char>(v));
    }
  }
  return out.str();
}

Json PathToJson(const PathPolyline& path) {
  Json points = Json::array();
  for (const Vec2& p : path.points) points.push_back(Json::array({p.x, p.y}));
  return {{"length", path.total_length()}, {"points", points}};
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace wbc
