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

#include "detpost/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "detpost/error.hpp"
#include "detpost/parallel.hpp"

namespace detpost {

namespace {

void check_group(std::span<const Detection> dets, const char* op) {
  if (dets.empty()) return;
  const Detection& first = dets.front();
  for (const auto& d : dets) {
    check_detection(d);
    if (d.volume_id != first.volume_id || d.slice_index != first.slice_index ||
        d.label != first.label) {
      throw ContractViolation(std::string(op) +
                              ": detections must share volume_id, slice_index and label");
    }
  }
}

std::vector<Detection> sorted_copy(std::span<const Detection> dets) {
  std::vector<Detection> out(dets.begin(), dets.end());
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

void check_ratio(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ContractViolation(std::string(name) + " must lie in (0, 1), got " + std::to_string(value));
  }
}

// Running state of one WBF cluster; sums are accumulated in visiting order.
struct Cluster {
  double wx1 = 0, wy1 = 0, wx2 = 0, wy2 = 0, weight = 0;
  double sx1 = 0, sy1 = 0, sx2 = 0, sy2 = 0;
  double score_sum = 0, score_max = 0;
  int members = 0;
  Box2D fused;

  explicit Cluster(const Detection& d) : fused(d.box) { add(d); }

  void add(const Detection& d) {
    const double w = d.score;
    wx1 += w * d.box.x1();
    wy1 += w * d.box.y1();
    wx2 += w * d.box.x2();
    wy2 += w * d.box.y2();
    weight += w;
    sx1 += d.box.x1();
    sy1 += d.box.y1();
    sx2 += d.box.x2();
    sy2 += d.box.y2();
    score_sum += d.score;
    score_max = std::max(score_max, d.score);
    ++members;
    if (weight > 0.0) {
      fused = Box2D(wx1 / weight, wy1 / weight, wx2 / weight, wy2 / weight);
    } else {
      const double n = members;
      fused = Box2D(sx1 / n, sy1 / n, sx2 / n, sy2 / n);
    }
  }
};

}  // namespace

void FusionParams::validate() const {
  check_ratio(iou_cluster_thr, "iou_cluster_thr");
  check_ratio(nms_iou_thr, "nms_iou_thr");
  if (!(soft_nms_sigma > 0.0) || !std::isfinite(soft_nms_sigma)) {
    throw ContractViolation("soft_nms_sigma must be positive");
  }
  if (model_count < 1) throw ContractViolation("model_count must be at least 1");
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_thr) {
  check_group(dets, "nms");
  if (!(iou_thr >= 0.0 && iou_thr <= 1.0)) throw ContractViolation("nms: iou_thr outside [0, 1]");
  std::vector<Detection> order = sorted_copy(dets);
  std::vector<bool> removed(order.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (removed[i]) continue;
    kept.push_back(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!removed[j] && iou(order[i].box, order[j].box) > iou_thr) removed[j] = true;
    }
  }
  return kept;
}

std::vector<Detection> soft_nms(std::span<const Detection> dets, const FusionParams& params) {
  check_group(dets, "soft_nms");
  if (!(params.soft_nms_sigma > 0.0)) throw ContractViolation("soft_nms: sigma must be positive");
  std::vector<Detection> remaining = sorted_copy(dets);
  std::vector<Detection> kept;
  kept.reserve(remaining.size());
  while (!remaining.empty()) {
    auto best = std::min_element(remaining.begin(), remaining.end(), score_order);
    kept.push_back(std::move(*best));
    remaining.erase(best);
    const Detection& anchor = kept.back();
    std::vector<Detection> survivors;
    survivors.reserve(remaining.size());
    for (auto& d : remaining) {
      const double overlap = iou(anchor.box, d.box);
      if (overlap > 0.0) {
        d.score *= std::exp(-(overlap * overlap) / params.soft_nms_sigma);
        if (d.score < kSoftNmsDropScore) continue;
      }
      survivors.push_back(std::move(d));
    }
    remaining = std::move(survivors);
  }
  std::sort(kept.begin(), kept.end(), score_order);
  return kept;
}

std::vector<Detection> wbf(const std::vector<std::vector<Detection>>& det_sets,
                           const FusionParams& params) {
  std::vector<Detection> pooled;
  for (const auto& set : det_sets) pooled.insert(pooled.end(), set.begin(), set.end());
  if (pooled.empty()) return {};
  if (params.model_count != static_cast<int>(det_sets.size())) {
    throw ContractViolation("wbf: model_count " + std::to_string(params.model_count) +
                            " does not match " + std::to_string(det_sets.size()) +
                            " detection sets");
  }
  check_ratio(params.iou_cluster_thr, "iou_cluster_thr");
  check_group(pooled, "wbf");
  std::sort(pooled.begin(), pooled.end(), score_order);

  std::vector<Cluster> clusters;
  for (const auto& d : pooled) {
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
      return iou(c.fused, d.box) > params.iou_cluster_thr;
    });
    if (it == clusters.end()) {
      clusters.emplace_back(d);
    } else {
      it->add(d);
    }
  }

  const Detection& proto = pooled.front();
  const double models = params.model_count;
  std::vector<Detection> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) {
    double score = params.score_mode == ScoreMode::kMean ? c.score_sum / c.members : c.score_max;
    if (params.rescale_mode == RescaleMode::kCountOverModels) {
      score *= std::min<double>(c.members, models) / models;
    }
    out.push_back(Detection{c.fused, std::clamp(score, 0.0, 1.0), kFusedModelId, proto.volume_id,
                            proto.slice_index, proto.label});
  }
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

DetectionDataset fuse_volume(std::span<const DetectionDataset> per_model, const FusionParams& params,
                             FusionMethod method, unsigned threads) {
  DetectionDataset result;
  if (per_model.empty()) return result;
  result.volume_index = per_model.front().volume_index;
  if (method == FusionMethod::kWbf && params.model_count != static_cast<int>(per_model.size())) {
    throw ContractViolation("fuse_volume: model_count " + std::to_string(params.model_count) +
                            " does not match " + std::to_string(per_model.size()) + " datasets");
  }

  using GroupKey = std::tuple<std::string, int, std::string>;
  std::map<GroupKey, std::vector<std::vector<Detection>>> groups;
  for (std::size_t m = 0; m < per_model.size(); ++m) {
    for (const auto& d : per_model[m].records) {
      const auto inv = result.volume_index.find(d.volume_id);
      if (inv == result.volume_index.end()) {
        throw ReferentialError("fuse_volume: model " + std::to_string(m) +
                               " references unknown volume '" + d.volume_id + "'");
      }
      if (d.slice_index < 0 || d.slice_index >= inv->second) {
        throw ReferentialError("fuse_volume: slice " + std::to_string(d.slice_index) +
                               " outside volume '" + d.volume_id + "'");
      }
      auto& sets = groups[GroupKey{d.volume_id, d.slice_index, d.label}];
      sets.resize(per_model.size());
      sets[m].push_back(d);
    }
  }

  std::vector<const std::vector<std::vector<Detection>>*> work;
  work.reserve(groups.size());
  for (const auto& [key, sets] : groups) work.push_back(&sets);

  std::vector<std::vector<Detection>> fused(work.size());
  parallel_for(work.size(), threads, [&](std::size_t i) {
    const auto& sets = *work[i];
    if (method == FusionMethod::kWbf) {
      fused[i] = wbf(sets, params);
      return;
    }
    std::vector<Detection> pooled;
    for (const auto& s : sets) pooled.insert(pooled.end(), s.begin(), s.end());
    fused[i] = method == FusionMethod::kNms ? nms(pooled, params.nms_iou_thr)
                                           : soft_nms(pooled, params);
  });

  for (auto& group : fused) {
    result.records.insert(result.records.end(), std::make_move_iterator(group.begin()),
                          std::make_move_iterator(group.end()));
  }
  std::sort(result.records.begin(), result.records.end(), canonical_order);
  return result;
}

std::optional<FusionMethod> parse_fusion_method(std::string_view name) {
  if (name == "nms") return FusionMethod::kNms;
  if (name == "soft-nms" || name == "soft_nms") return FusionMethod::kSoftNms;
  if (name == "wbf") return FusionMethod::kWbf;
  return std::nullopt;
}

}  // namespace detpost
