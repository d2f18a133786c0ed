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

#include "wbc/geometry.h"

#include <algorithm>
#include <limits>
#include <numbers>

namespace wbc {

double WrapAngle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  if (wrapped > std::numbers::pi) wrapped -= kTwoPi;
  return wrapped;
}

Pose2 Compose(const Pose2& a, const Pose2& b) {
  const Vec2 p = TransformPoint(a, {b.x, b.y});
  return {p.x, p.y, a.theta + b.theta};
}

Pose2 Inverse(const Pose2& p) {
  const Vec2 t = Rotate({-p.x, -p.y}, -p.theta);
  return {t.x, t.y, -p.theta};
}

Vec2 TransformPoint(const Pose2& frame, const Vec2& local) {
  return Rotate(local, frame.theta) + Vec2{frame.x, frame.y};
}

std::vector<Segment> BoxEdges(const Box& box) {
  const Vec2 a = box.lo;
  const Vec2 b{box.hi.x, box.lo.y};
  const Vec2 c = box.hi;
  const Vec2 d{box.lo.x, box.hi.y};
  return {{a, b}, {b, c}, {c, d}, {d, a}};
}

Vec2 ClosestPointOnSegment(const Vec2& p, const Segment& s, double* t) {
  const Vec2 ab = s.b - s.a;
  const double len2 = Dot(ab, ab);
  double u = 0.0;
  if (len2 > 0.0) u = std::clamp(Dot(p - s.a, ab) / len2, 0.0, 1.0);
  if (t != nullptr) *t = u;
  return s.a + ab * u;
}

double PointSegmentDistance(const Vec2& p, const Segment& s) {
  return Distance(p, ClosestPointOnSegment(p, s));
}

namespace {

int Orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = Cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool OnSegment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool SegmentsIntersect(const Segment& s1, const Segment& s2) {
  const int o1 = Orientation(s1.a, s1.b, s2.a);
  const int o2 = Orientation(s1.a, s1.b, s2.b);
  const int o3 = Orientation(s2.a, s2.b, s1.a);
  const int o4 = Orientation(s2.a, s2.b, s1.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && OnSegment(s1.a, s1.b, s2.a)) return true;
  if (o2 == 0 && OnSegment(s1.a, s1.b, s2.b)) return true;
  if (o3 == 0 && OnSegment(s2.a, s2.b, s1.a)) return true;
  if (o4 == 0 && OnSegment(s2.a, s2.b, s1.b)) return true;
  return false;
}

double SegmentSegmentDistance(const Segment& s1, const Segment& s2) {
  if (SegmentsIntersect(s1, s2)) return 0.0;
  return std::min({PointSegmentDistance(s1.a, s2), PointSegmentDistance(s1.b, s2),
                   PointSegmentDistance(s2.a, s1), PointSegmentDistance(s2.b, s1)});
}

double PointBoxDistance(const Vec2& p, const Box& box) {
  const double dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
  const double dy = std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y});
  return std::hypot(dx, dy);
}

double SegmentBoxDistance(const Segment& s, const Box& box) {
  if (box.Contains(s.a) || box.Contains(s.b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& edge : BoxEdges(box)) {
    best = std::min(best, SegmentSegmentDistance(s, edge));
  }
  return best;
}

std::optional<double> RaySegmentHit(const Vec2& origin, const Vec2& dir,
                                    const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double denom = Cross(dir, e);
  const Vec2 w = s.a - origin;
  if (denom == 0.0) {
    // Parallel. A collinear segment is hit at its nearest endpoint ahead.
    if (Cross(w, dir) != 0.0) return std::nullopt;
    const double ta = Dot(s.a - origin, dir);
    const double tb = Dot(s.b - origin, dir);
    if (ta < 0.0 && tb < 0.0) return std::nullopt;
    if (ta < 0.0 || tb < 0.0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = Cross(w, e) / denom;
  const double u = Cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> RayBoxHit(const Vec2& origin, const Vec2& dir,
                                const Box& box) {
  if (box.Contains(origin)) return 0.0;
  std::optional<double> best;
  for (const Segment& edge : BoxEdges(box)) {
    const auto t = RaySegmentHit(origin, dir, edge);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

}  // namespace wbc
