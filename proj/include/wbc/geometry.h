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

#ifndef WBC_GEOMETRY_H_
#define WBC_GEOMETRY_H_

#include <cmath>
#include <optional>
#include <vector>

namespace wbc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline double Dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double Cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double Norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double Distance(const Vec2& a, const Vec2& b) { return Norm(a - b); }
inline Vec2 Rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

// Planar rigid transform: rotation by `theta` followed by translation.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2&) const = default;
};

// a * b: express b (given in a's frame) in a's parent frame.
Pose2 Compose(const Pose2& a, const Pose2& b);
Pose2 Inverse(const Pose2& p);
Vec2 TransformPoint(const Pose2& frame, const Vec2& local);

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Axis-aligned rectangle; lo is the lower-left corner.
struct Box {
  Vec2 lo;
  Vec2 hi;

  bool Contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
};

std::vector<Segment> BoxEdges(const Box& box);

// Closest point on `s` to `p`, and its parameter in [0, 1].
Vec2 ClosestPointOnSegment(const Vec2& p, const Segment& s, double* t = nullptr);
double PointSegmentDistance(const Vec2& p, const Segment& s);
double SegmentSegmentDistance(const Segment& s1, const Segment& s2);
bool SegmentsIntersect(const Segment& s1, const Segment& s2);

// Zero when the point lies inside the box.
double PointBoxDistance(const Vec2& p, const Box& box);
// Zero when the segment touches or enters the box.
double SegmentBoxDistance(const Segment& s, const Box& box);

// Ray parameter t >= 0 of the first hit, with `dir` of unit length.
std::optional<double> RaySegmentHit(const Vec2& origin, const Vec2& dir,
                                    const Segment& s);
// A ray starting inside the box hits at t = 0.
std::optional<double> RayBoxHit(const Vec2& origin, const Vec2& dir,
                                const Box& box);

}  // namespace wbc

#endif  // WBC_GEOMETRY_H_
