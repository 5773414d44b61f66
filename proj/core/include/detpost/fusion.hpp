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

#ifndef DETPOST_FUSION_HPP_
#define DETPOST_FUSION_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "detpost/dataset.hpp"
#include "detpost/detection.hpp"

namespace detpost {

enum class ScoreMode { kMean, kMax };
enum class RescaleMode { kNone, kCountOverModels };
enum class FusionMethod { kNms, kSoftNms, kWbf };

/// Soft-NMS drops a detection once its decayed score falls below this.
inline constexpr double kSoftNmsDropScore = 1e-3;

struct FusionParams {
  double iou_cluster_thr = 0.55;
  ScoreMode score_mode = ScoreMode::kMean;
  RescaleMode rescale_mode = RescaleMode::kCountOverModels;
  double soft_nms_sigma = 0.5;
  double nms_iou_thr = 0.5;
  int model_count = 1;

  /// Throws ContractViolation unless thresholds are in (0, 1), sigma > 0 and
  /// model_count >= 1.
  void validate() const;
};

/// Greedy hard NMS on one (volume, slice, label) group.
///
/// Keeps the best remaining detection and discards every other one whose IoU
/// with it exceeds iou_thr. The result is a subset of the input sorted by
/// score_order. Throws ContractViolation on mixed groups.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_thr);

/// Gaussian Soft-NMS on one group.
///
/// Each time the best remaining detection is kept, every other remaining
/// score is multiplied by exp(-iou^2 / sigma). A detection whose score was
/// decayed below kSoftNmsDropScore is dropped; undecayed scores are never
/// touched.
std::vector<Detection> soft_nms(std::span<const Detection> dets, const FusionParams& params);

/// Weighted Boxes Fusion over one group, one inner vector per model.
///
/// Detections are pooled and visited in score_order. Each joins the first
/// cluster (in creation order) whose current fused box has IoU above
/// iou_cluster_thr, or opens a new cluster. Fused coordinates are the
/// score-weighted mean of the members and are updated as soon as a member
/// joins. The fused score is the mean or max member score, optionally scaled
/// by min(N, T) / T with N the cluster size and T the model count.
std::vector<Detection> wbf(const std::vector<std::vector<Detection>>& det_sets,
                           const FusionParams& params);

/// Applies a fusion method independently to every (volume, slice, label) group
/// of the pooled per-model datasets.
///
/// The inventory of the first dataset is authoritative; records pointing to a
/// volume outside it raise ReferentialError. For kWbf, params.model_count must
/// equal per_model.size(). Output records are in canonical_order, so the
/// result does not depend on `threads`.
DetectionDataset fuse_volume(std::span<const DetectionDataset> per_model, const FusionParams& params,
                             FusionMethod method, unsigned threads = 1);

std::optional<FusionMethod> parse_fusion_method(std::string_view name);

}  // namespace detpost

#endif  // DETPOST_FUSION_HPP_
