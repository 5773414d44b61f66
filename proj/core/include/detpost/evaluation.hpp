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

#ifndef DETPOST_EVALUATION_HPP_
#define DETPOST_EVALUATION_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detpost/dataset.hpp"
#include "detpost/detection.hpp"

namespace detpost {

enum class Interpolation { kStep, kLinear };
enum class ApMode { kInterp101, kAllPoints };

struct EvalConfig {
  double iou_thr = 0.25;
  std::vector<double> fp_targets = {0.5, 1, 2, 4, 6, 8, 16};
  Interpolation interpolation = Interpolation::kStep;
  ApMode ap_mode = ApMode::kInterp101;
  unsigned threads = 1;

  /// Throws ContractViolation unless iou_thr is in (0, 1] and fp_targets is a
  /// non-empty strictly increasing list of positive values.
  void validate() const;
};

enum class MatchFlag { kTruePositive, kFalsePositive };

struct DetectionMatch {
  MatchFlag flag = MatchFlag::kFalsePositive;
  std::string lesion_id;  // empty for false positives
  double iou = 0.0;
};

struct LesionMatch {
  std::string lesion_id;
  bool detected = false;
  std::optional<double> best_score;
};

/// Per-detection flags (parallel to the input detections) and per-lesion
/// outcomes (parallel to the input lesions).
struct MatchResult {
  std::vector<DetectionMatch> detections;
  std::vector<LesionMatch> lesions;

  std::size_t tp_count() const noexcept;
  std::size_t fp_count() const noexcept;
  std::size_t detected_lesions() const noexcept;
};

/// Greedy score-descending matching for one volume.
///
/// Each detection, in score_order, takes the unmatched GT box on its own
/// slice with the highest IoU, provided IoU >= iou_thr; ties go to the lower
/// box coordinates, then the lower lesion_id. A lesion is detected once any
/// box of its 3D extent is matched; its other boxes stay available.
MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const LesionAnnotation> lesions, double iou_thr);

struct FrocPoint {
  double mean_fp_per_volume = 0.0;
  double sensitivity = 0.0;

  friend bool operator==(const FrocPoint&, const FrocPoint&) = default;
};

/// Operating points in ascending FP order, one per distinct score threshold.
struct FrocCurve {
  std::vector<FrocPoint> points;

  friend bool operator==(const FrocCurve&, const FrocCurve&) = default;
};

/// Lesion-level FROC with false positives averaged over every volume in
/// `gt_by_volume` (volumes without lesions or detections count too).
///
/// Throws ReferentialError when a detection volume is missing from
/// gt_by_volume and UndefinedMetric when there are no lesions at all.
FrocCurve froc(const DetectionsByVolume& dets_by_volume, const LesionsByVolume& gt_by_volume,
               const EvalConfig& cfg);

struct SensitivityAt {
  double fp_target = 0.0;
  double sensitivity = 0.0;

  friend bool operator==(const SensitivityAt&, const SensitivityAt&) = default;
};

/// Reads the curve at each of cfg.fp_targets.
///
/// Values are taken from the left limit at the target: only operating points
/// with FP strictly below t bracket it from below, so a vertical jump sitting
/// exactly at t is not credited. kStep returns the last such point; kLinear
/// interpolates towards the first point with FP >= t. With no point below t
/// the result is the first point's sensitivity if its FP <= t, else 0; past
/// the last point the last sensitivity holds.
std::vector<SensitivityAt> sensitivity_at_fp(const FrocCurve& curve, const EvalConfig& cfg);

/// Box-level average precision of one class over a global score sweep.
double average_precision(const DetectionsByVolume& dets_by_volume,
                         const LesionsByVolume& gt_by_volume, const EvalConfig& cfg);

struct ModelScore {
  std::string method_name;
  double map_percent = 0.0;
};

/// Names whose mAP strictly exceeds `threshold_percent`, best first.
std::vector<std::string> ensemble_gate(std::span<const ModelScore> model_maps,
                                       double threshold_percent = 45.0);

struct EvalReport {
  std::string method_name;
  double map_percent = 0.0;
  std::vector<SensitivityAt> sensitivity_percent;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate(const DetectionsByVolume& dets_by_volume, const LesionsByVolume& gt_by_volume,
                    const EvalConfig& cfg, std::string method_name);

std::optional<Interpolation> parse_interpolation(std::string_view name);
std::optional<ApMode> parse_ap_mode(std::string_view name);

}  // namespace detpost

#endif  // DETPOST_EVALUATION_HPP_
