// Copyright 2026 The detpost Authors
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

#include "detpost/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "detpost/error.hpp"

namespace detpost {

namespace {

bool valid(double x1, double y1, double x2, double y2) noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x2 > x1 && y2 > y1;
}

}  // namespace

Box2D::Box2D(double x1, double y1, double x2, double y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
  if (!valid(x1, y1, x2, y2)) {
    std::ostringstream msg;
    msg << "invalid box [" << x1 << ", " << y1 << ", " << x2 << ", " << y2
        << "]: requires finite coordinates with x2 > x1 and y2 > y1";
    throw InvalidBox(msg.str());
  }
}

std::optional<Box2D> Box2D::make(double x1, double y1, double x2, double y2) noexcept {
  if (!valid(x1, y1, x2, y2)) return std::nullopt;
  return Box2D(Unchecked{}, x1, y1, x2, y2);
}

double area(const Box2D& b) noexcept { return b.width() * b.height(); }

double intersection_area(const Box2D& a, const Box2D& b) noexcept {
  const double w = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double h = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box2D& a, const Box2D& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box2D translated(const Box2D& b, double dx, double dy) {
  return Box2D(b.x1() + dx, b.y1() + dy, b.x2() + dx, b.y2() + dy);
}

Box2D scaled(const Box2D& b, double s) { return Box2D(b.x1() * s, b.y1() * s, b.x2() * s, b.y2() * s); }

bool coord_less(const Box2D& a, const Box2D& b) noexcept {
  return std::make_tuple(a.x1(), a.y1(), a.x2(), a.y2()) <
         std::make_tuple(b.x1(), b.y1(), b.x2(), b.y2());
}

}  // namespace detpost
