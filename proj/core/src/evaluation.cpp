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

#include "detpost/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "detpost/error.hpp"
#include "detpost/geometry.hpp"
#include "detpost/parallel.hpp"

namespace detpost {

namespace {

struct GtBox {
  int slice;
  const Box2D* box;
  std::size_t lesion;
  bool matched = false;
};

// Matches every volume in gt_by_volume; slot i belongs to the i-th volume.
struct VolumeMatch {
  const std::vector<Detection>* dets = nullptr;
  const std::vector<LesionAnnotation>* lesions = nullptr;
  MatchResult result;
};

std::vector<VolumeMatch> match_all(const DetectionsByVolume& dets_by_volume,
                                   const LesionsByVolume& gt_by_volume, const EvalConfig& cfg) {
  for (const auto& [volume_id, dets] : dets_by_volume) {
    if (!dets.empty() && !gt_by_volume.contains(volume_id)) {
      throw ReferentialError("detections reference volume '" + volume_id +
                             "' which is absent from the ground truth inventory");
    }
  }
  static const std::vector<Detection> kNoDetections;
  std::vector<VolumeMatch> volumes;
  volumes.reserve(gt_by_volume.size());
  for (const auto& [volume_id, lesions] : gt_by_volume) {
    const auto it = dets_by_volume.find(volume_id);
    volumes.push_back({it == dets_by_volume.end() ? &kNoDetections : &it->second, &lesions, {}});
  }
  parallel_for(volumes.size(), cfg.threads, [&](std::size_t i) {
    volumes[i].result = match_detections(*volumes[i].dets, *volumes[i].lesions, cfg.iou_thr);
  });
  return volumes;
}

}  // namespace

void EvalConfig::validate() const {
  if (!(iou_thr > 0.0 && iou_thr <= 1.0)) {
    throw ContractViolation("iou_thr must lie in (0, 1], got " + std::to_string(iou_thr));
  }
  if (fp_targets.empty()) throw ContractViolation("fp_targets must not be empty");
  for (std::size_t i = 0; i < fp_targets.size(); ++i) {
    if (!(fp_targets[i] > 0.0) || !std::isfinite(fp_targets[i])) {
      throw ContractViolation("fp_targets must be positive and finite");
    }
    if (i > 0 && !(fp_targets[i] > fp_targets[i - 1])) {
      throw ContractViolation("fp_targets must be strictly increasing");
    }
  }
}

std::size_t MatchResult::tp_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(detections.begin(), detections.end(), [](const auto& m) {
    return m.flag == MatchFlag::kTruePositive;
  }));
}

std::size_t MatchResult::fp_count() const noexcept { return detections.size() - tp_count(); }

std::size_t MatchResult::detected_lesions() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(lesions.begin(), lesions.end(), [](const auto& l) { return l.detected; }));
}

MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const LesionAnnotation> lesions, double iou_thr) {
  const std::string* volume = nullptr;
  const auto same_volume = [&](const std::string& id) {
    if (volume == nullptr) volume = &id;
    if (*volume != id) {
      throw ContractViolation("match_detections: inputs mix volumes '" + *volume + "' and '" + id + "'");
    }
  };
  for (const auto& d : dets) same_volume(d.volume_id);
  for (const auto& l : lesions) {
    same_volume(l.volume_id);
    check_lesion(l);
  }

  std::vector<GtBox> gt;
  std::unordered_map<int, std::vector<std::size_t>> by_slice;
  for (std::size_t li = 0; li < lesions.size(); ++li) {
    for (const auto& sb : lesions[li].extent) {
      by_slice[sb.slice_index].push_back(gt.size());
      gt.push_back({sb.slice_index, &sb.box, li});
    }
  }

  MatchResult result;
  result.detections.resize(dets.size());
  result.lesions.reserve(lesions.size());
  for (const auto& l : lesions) result.lesions.push_back({l.lesion_id, false, std::nullopt});

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score_order(dets[a], dets[b]); });

  for (const std::size_t di : order) {
    const Detection& d = dets[di];
    const auto slice = by_slice.find(d.slice_index);
    if (slice == by_slice.end()) continue;
    GtBox* best = nullptr;
    double best_iou = 0.0;
    for (const std::size_t gi : slice->second) {
      GtBox& g = gt[gi];
      if (g.matched) continue;
      const double v = iou(d.box, *g.box);
      if (v < iou_thr || v <= 0.0) continue;
      bool better = best == nullptr || v > best_iou;
      if (!better && v == best_iou) {
        if (coord_less(*g.box, *best->box)) {
          better = true;
        } else if (*g.box == *best->box) {
          better = lesions[g.lesion].lesion_id < lesions[best->lesion].lesion_id;
        }
      }
      if (better) {
        best = &g;
        best_iou = v;
      }
    }
    if (best == nullptr) continue;
    best->matched = true;
    auto& m = result.detections[di];
    m.flag = MatchFlag::kTruePositive;
    m.lesion_id = lesions[best->lesion].lesion_id;
    m.iou = best_iou;
    auto& lesion = result.lesions[best->lesion];
    lesion.detected = true;
    if (!lesion.best_score || d.score > *lesion.best_score) lesion.best_score = d.score;
  }
  return result;
}

FrocCurve froc(const DetectionsByVolume& dets_by_volume, const LesionsByVolume& gt_by_volume,
               const EvalConfig& cfg) {
  std::size_t total_lesions = 0;
  for (const auto& [id, lesions] : gt_by_volume) total_lesions += lesions.size();
  if (total_lesions == 0) throw UndefinedMetric("froc: sensitivity is undefined without lesions");

  const auto volumes = match_all(dets_by_volume, gt_by_volume, cfg);

  // Greedy matching in descending score order is prefix-stable, so the match
  // at threshold s is the full match restricted to scores >= s.
  std::vector<double> all_scores;
  std::vector<double> fp_scores;
  std::vector<double> lesion_scores;
  for (const auto& v : volumes) {
    for (std::size_t i = 0; i < v.dets->size(); ++i) {
      const double s = (*v.dets)[i].score;
      all_scores.push_back(s);
      if (v.result.detections[i].flag == MatchFlag::kFalsePositive) fp_scores.push_back(s);
    }
    for (const auto& l : v.result.lesions) {
      if (l.best_score) lesion_scores.push_back(*l.best_score);
    }
  }

  FrocCurve curve;
  if (all_scores.empty()) {
    curve.points.push_back({0.0, 0.0});
    return curve;
  }
  const auto desc = std::greater<double>();
  std::sort(all_scores.begin(), all_scores.end(), desc);
  std::sort(fp_scores.begin(), fp_scores.end(), desc);
  std::sort(lesion_scores.begin(), lesion_scores.end(), desc);
  all_scores.erase(std::unique(all_scores.begin(), all_scores.end()), all_scores.end());

  const double n_volumes = static_cast<double>(gt_by_volume.size());
  const double n_lesions = static_cast<double>(total_lesions);
  std::size_t fp = 0;
  std::size_t found = 0;
  for (const double threshold : all_scores) {
    while (fp < fp_scores.size() && fp_scores[fp] >= threshold) ++fp;
    while (found < lesion_scores.size() && lesion_scores[found] >= threshold) ++found;
    curve.points.push_back(
        {static_cast<double>(fp) / n_volumes, static_cast<double>(found) / n_lesions});
  }
  return curve;
}

std::vector<SensitivityAt> sensitivity_at_fp(const FrocCurve& curve, const EvalConfig& cfg) {
  if (curve.points.empty()) throw ContractViolation("sensitivity_at_fp: empty curve");
  const auto& pts = curve.points;
  std::vector<SensitivityAt> out;
  out.reserve(cfg.fp_targets.size());
  for (const double t : cfg.fp_targets) {
    // First point with FP >= t; everything before it lies strictly below t.
    const auto hi = std::partition_point(pts.begin(), pts.end(),
                                         [t](const FrocPoint& p) { return p.mean_fp_per_volume < t; });
    double value = 0.0;
    if (hi == pts.begin()) {
      value = pts.front().mean_fp_per_volume <= t ? pts.front().sensitivity : 0.0;
    } else {
      const FrocPoint& lo = *std::prev(hi);
      value = lo.sensitivity;
      if (cfg.interpolation == Interpolation::kLinear && hi != pts.end()) {
        const double span = hi->mean_fp_per_volume - lo.mean_fp_per_volume;
        value += (hi->sensitivity - lo.sensitivity) * (t - lo.mean_fp_per_volume) / span;
      }
    }
    out.push_back({t, value});
  }
  return out;
}

double average_precision(const DetectionsByVolume& dets_by_volume,
                         const LesionsByVolume& gt_by_volume, const EvalConfig& cfg) {
  std::size_t total_boxes = 0;
  for (const auto& [id, lesions] : gt_by_volume) {
    for (const auto& l : lesions) total_boxes += l.extent.size();
  }
  if (total_boxes == 0) throw UndefinedMetric("average_precision: undefined without GT boxes");

  const auto volumes = match_all(dets_by_volume, gt_by_volume, cfg);
  struct Item {
    const Detection* det;
    bool tp;
  };
  std::vector<Item> items;
  for (const auto& v : volumes) {
    for (std::size_t i = 0; i < v.dets->size(); ++i) {
      items.push_back({&(*v.dets)[i], v.result.detections[i].flag == MatchFlag::kTruePositive});
    }
  }
  if (items.empty()) return 0.0;
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return score_order(*a.det, *b.det); });

  std::vector<double> precision(items.size());
  std::vector<double> recall(items.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].tp) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_boxes);
  }
  // Precision envelope: max precision at any recall >= the current one.
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  if (cfg.ap_mode == ApMode::kAllPoints) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
    return ap;
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

std::vector<std::string> ensemble_gate(std::span<const ModelScore> model_maps,
                                       double threshold_percent) {
  std::vector<ModelScore> selected;
  for (const auto& m : model_maps) {
    if (!(m.map_percent >= 0.0 && m.map_percent <= 100.0)) {
      throw ContractViolation("ensemble_gate: mAP of '" + m.method_name + "' outside [0, 100]");
    }
    if (m.map_percent > threshold_percent) selected.push_back(m);
  }
  std::sort(selected.begin(), selected.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.map_percent != b.map_percent) return a.map_percent > b.map_percent;
    return a.method_name < b.method_name;
  });
  std::vector<std::string> names;
  names.reserve(selected.size());
  for (auto& m : selected) names.push_back(std::move(m.method_name));
  return names;
}

EvalReport evaluate(const DetectionsByVolume& dets_by_volume, const LesionsByVolume& gt_by_volume,
                    const EvalConfig& cfg, std::string method_name) {
  cfg.validate();
  EvalReport report;
  report.method_name = std::move(method_name);
  const FrocCurve curve = froc(dets_by_volume, gt_by_volume, cfg);
  for (const auto& s : sensitivity_at_fp(curve, cfg)) {
    report.sensitivity_percent.push_back({s.fp_target, 100.0 * s.sensitivity});
  }
  report.map_percent = 100.0 * average_precision(dets_by_volume, gt_by_volume, cfg);
  return report;
}

std::optional<Interpolation> parse_interpolation(std::string_view name) {
  if (name == "step") return Interpolation::kStep;
  if (name == "linear") return Interpolation::kLinear;
  return std::nullopt;
}

std::optional<ApMode> parse_ap_mode(std::string_view name) {
  if (name == "101" || name == "interp101") return ApMode::kInterp101;
  if (name == "all" || name == "all-points") return ApMode::kAllPoints;
  return std::nullopt;
}

}  // namespace detpost
