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

#ifndef DETPOST_HNEM_HPP_
#define DETPOST_HNEM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "detpost/detection.hpp"

namespace detpost {

struct MiningResult {
  std::vector<Detection> hard_negatives;  // score_order
  double tp_floor = 0.0;
  std::size_t tp_count = 0;
};

/// Hard negatives of one volume: predictions that touch no GT box on their
/// slice (IoU exactly 0) and score above the lowest true-positive score.
///
/// True positives come from match_detections at iou_thr. When the volume has
/// no true positive, `fallback_floor` is used as the cutoff.
MiningResult select_hard_negatives(std::span<const Detection> preds,
                                   std::span<const LesionAnnotation> lesions,
                                   double iou_thr = 0.25, double fallback_floor = 0.5);

}  // namespace detpost

#endif  // DETPOST_HNEM_HPP_
