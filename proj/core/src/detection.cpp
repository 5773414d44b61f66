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

#include "detpost/detection.hpp"

#include <cmath>
#include <set>
#include <tuple>

#include "detpost/error.hpp"

namespace detpost {

bool score_order(const Detection& a, const Detection& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  const auto key = [](const Detection& d) {
    return std::tie(d.model_id, d.slice_index);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  const auto coords = [](const Detection& d) {
    return std::make_tuple(d.box.x1(), d.box.y1(), d.box.x2(), d.box.y2());
  };
  if (coords(a) != coords(b)) return coords(a) < coords(b);
  return std::tie(a.volume_id, a.label) < std::tie(b.volume_id, b.label);
}

void check_detection(const Detection& d) {
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw ContractViolation("detection score " + std::to_string(d.score) + " outside [0, 1]");
  }
  if (d.slice_index < 0) {
    throw ContractViolation("negative slice_index " + std::to_string(d.slice_index));
  }
}

void check_lesion(const LesionAnnotation& lesion) {
  if (lesion.extent.empty()) {
    throw ContractViolation("lesion '" + lesion.lesion_id + "' has an empty extent");
  }
  std::set<int> seen;
  for (const auto& sb : lesion.extent) {
    if (sb.slice_index < 0) {
      throw ContractViolation("lesion '" + lesion.lesion_id + "' has a negative slice index");
    }
    if (!seen.insert(sb.slice_index).second) {
      throw ContractViolation("lesion '" + lesion.lesion_id + "' repeats slice " +
                              std::to_string(sb.slice_index));
    }
  }
}

}  // namespace detpost
