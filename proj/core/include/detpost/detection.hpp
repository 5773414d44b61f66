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

#ifndef DETPOST_DETECTION_HPP_
#define DETPOST_DETECTION_HPP_

#include <string>
#include <utility>
#include <vector>

#include "detpost/geometry.hpp"

namespace detpost {

inline constexpr const char* kDefaultLabel = "LN";
inline constexpr const char* kFusedModelId = "fused";

/// One predicted box on one slice of one volume.
struct Detection {
  Box2D box;
  double score = 0.0;  // in [0, 1]
  std::string model_id;
  std::string volume_id;
  int slice_index = 0;
  std::string label = kDefaultLabel;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Strict total order used wherever detections are processed "by score":
/// descending score, then model_id, slice_index, x1, y1 ascending, then the
/// remaining fields. Only fully identical records compare equal.
bool score_order(const Detection& a, const Detection& b) noexcept;

/// Throws ContractViolation unless 0 <= score <= 1 and slice_index >= 0.
void check_detection(const Detection& d);

/// GT box on one slice of a lesion.
struct SliceBox {
  int slice_index = 0;
  Box2D box;

  friend bool operator==(const SliceBox&, const SliceBox&) = default;
};

/// A 3D lesion described by its per-slice GT boxes.
struct LesionAnnotation {
  std::string lesion_id;
  std::string volume_id;
  std::vector<SliceBox> extent;

  friend bool operator==(const LesionAnnotation&, const LesionAnnotation&) = default;
};

/// Throws ContractViolation if the extent is empty or repeats a slice index.
void check_lesion(const LesionAnnotation& lesion);

}  // namespace detpost

#endif  // DETPOST_DETECTION_HPP_
