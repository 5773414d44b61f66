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

#ifndef DETPOST_GEOMETRY_HPP_
#define DETPOST_GEOMETRY_HPP_

#include <optional>

namespace detpost {

/// Axis-aligned rectangle in continuous pixel coordinates.
///
/// Corners are (x1, y1) and (x2, y2) with x2 > x1 and y2 > y1; the area is
/// (x2 - x1) * (y2 - y1) with no +1 pixel correction. Construction rejects
/// degenerate or non-finite boxes with InvalidBox.
class Box2D {
 public:
  Box2D(double x1, double y1, double x2, double y2);

  /// Same as the constructor but returns nullopt instead of throwing.
  static std::optional<Box2D> make(double x1, double y1, double x2, double y2) noexcept;

  double x1() const noexcept { return x1_; }
  double y1() const noexcept { return y1_; }
  double x2() const noexcept { return x2_; }
  double y2() const noexcept { return y2_; }
  double width() const noexcept { return x2_ - x1_; }
  double height() const noexcept { return y2_ - y1_; }

  friend bool operator==(const Box2D&, const Box2D&) = default;

 private:
  struct Unchecked {};
  Box2D(Unchecked, double x1, double y1, double x2, double y2) noexcept
      : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {}

  double x1_;
  double y1_;
  double x2_;
  double y2_;
};

double area(const Box2D& b) noexcept;

/// Area of the overlap of a and b; 0 when they are disjoint or only touch.
double intersection_area(const Box2D& a, const Box2D& b) noexcept;

/// Intersection over union in [0, 1]. iou(a, a) == 1 exactly.
double iou(const Box2D& a, const Box2D& b) noexcept;

Box2D translated(const Box2D& b, double dx, double dy);
Box2D scaled(const Box2D& b, double s);

/// Lexicographic (x1, y1, x2, y2) order, used for deterministic tie-breaks.
bool coord_less(const Box2D& a, const Box2D& b) noexcept;

}  // namespace detpost

#endif  // DETPOST_GEOMETRY_HPP_
