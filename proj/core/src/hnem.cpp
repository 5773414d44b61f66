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

#include "detpost/hnem.hpp"

#include <algorithm>
#include <limits>

#include "detpost/error.hpp"
#include "detpost/evaluation.hpp"
#include "detpost/geometry.hpp"

namespace detpost {

MiningResult select_hard_negatives(std::span<const Detection> preds,
                                   std::span<const LesionAnnotation> lesions, double iou_thr,
                                   double fallback_floor) {
  const MatchResult match = match_detections(preds, lesions, iou_thr);

  MiningResult result;
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (match.detections[i].flag != MatchFlag::kTruePositive) continue;
    ++result.tp_count;
    floor = std::min(floor, preds[i].score);
  }
  result.tp_floor = result.tp_count > 0 ? floor : fallback_floor;

  const auto touches_gt = [&](const Detection& d) {
    for (const auto& lesion : lesions) {
      for (const auto& sb : lesion.extent) {
        if (sb.slice_index == d.slice_index && intersection_area(d.box, sb.box) > 0.0) return true;
      }
    }
    return false;
  };
  for (const auto& d : preds) {
    if (d.score > result.tp_floor && !touches_gt(d)) result.hard_negatives.push_back(d);
  }
  std::sort(result.hard_negatives.begin(), result.hard_negatives.end(), score_order);
  return result;
}

}  // namespace detpost
