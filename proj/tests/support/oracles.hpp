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

// Independent reference implementations used only by the tests. Nothing in
// here calls the code paths it is used to check.

#ifndef DETPOST_TESTS_ORACLES_HPP_
#define DETPOST_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "detpost/detection.hpp"
#include "detpost/evaluation.hpp"

namespace detpost::oracle {

// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return real(0.0, 1.0) < p; }

  Box2D box(double extent = 100.0, double min_side = 1.0, double max_side = 50.0) {
    const double w = real(min_side, max_side);
    const double h = real(min_side, max_side);
    const double x = real(0.0, extent);
    const double y = real(0.0, extent);
    return Box2D(x, y, x + w, y + h);
  }

  // Box on a coarse lattice, where exact IoU ties and repeats are common.
  Box2D lattice_box(int cells = 6, double unit = 4.0) {
    const int x = integer(0, cells), y = integer(0, cells);
    const int w = integer(1, 3), h = integer(1, 3);
    return Box2D(x * unit, y * unit, (x + w) * unit, (y + h) * unit);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Detection det(Box2D box, double score, std::string model = "m0", std::string volume = "v0",
                     int slice = 0) {
  return Detection{box, score, std::move(model), std::move(volume), slice, kDefaultLabel};
}

// Closed-form IoU written independently of the library.
inline double closed_form_iou(const Box2D& a, const Box2D& b) {
  const double ow = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1()));
  const double oh = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1()));
  const double inter = ow * oh;
  if (inter == 0.0) return 0.0;
  const double area_a = (a.x2() - a.x1()) * (a.y2() - a.y1());
  const double area_b = (b.x2() - b.x1()) * (b.y2() - b.y1());
  return inter / (area_a + area_b - inter);
}

// Pixel-count IoU on a regular sample grid covering both boxes.
//
// A sample (x_i, y_j) lies in an axis-aligned box iff x_i lies in its x-range
// and y_j in its y-range, so the 2D count of a box or of an intersection is the
// product of two 1D sample counts. The counts are still obtained by visiting
// every sample along each axis.
inline double raster_iou(const Box2D& a, const Box2D& b, int samples_per_axis) {
  struct Counts {
    long long a = 0, b = 0, both = 0;
  };
  const auto axis = [&](double a1, double a2, double b1, double b2) {
    const double lo = std::min(a1, b1), hi = std::max(a2, b2);
    const double step = (hi - lo) / samples_per_axis;
    Counts c;
    for (int i = 0; i < samples_per_axis; ++i) {
      const double s = lo + (i + 0.5) * step;
      const bool in_a = s >= a1 && s < a2;
      const bool in_b = s >= b1 && s < b2;
      c.a += in_a;
      c.b += in_b;
      c.both += in_a && in_b;
    }
    return c;
  };
  const Counts x = axis(a.x1(), a.x2(), b.x1(), b.x2());
  const Counts y = axis(a.y1(), a.y2(), b.y1(), b.y2());
  const double inter = static_cast<double>(x.both * y.both);
  const double uni = static_cast<double>(x.a * y.a + x.b * y.b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Exhaustive greedy-NMS oracle: the greedy result is the unique subset S of
// the rank-ordered detections such that a detection is in S exactly when no
// higher-ranked member of S overlaps it by more than thr. All 2^n subsets are
// checked; the function returns every subset satisfying the condition.
inline std::vector<std::vector<Detection>> nms_fixed_points(std::vector<Detection> dets, double thr) {
  std::sort(dets.begin(), dets.end(), score_order);
  const std::size_t n = dets.size();
  std::vector<std::vector<Detection>> found;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      bool suppressed = false;
      for (std::size_t j = 0; j < i; ++j) {
        if ((mask >> j & 1u) && closed_form_iou(dets[j].box, dets[i].box) > thr) suppressed = true;
      }
      const bool member = mask >> i & 1u;
      ok = member == !suppressed;
    }
    if (!ok) continue;
    std::vector<Detection> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) subset.push_back(dets[i]);
    }
    found.push_back(std::move(subset));
  }
  return found;
}

// Naive matcher: for each detection in rank order, scan every GT box of the
// volume and keep the best unmatched same-slice box with IoU >= thr.
struct NaiveMatch {
  std::vector<bool> tp;                        // parallel to input detections
  std::map<std::string, bool> lesion_detected;  // by lesion id
};

inline NaiveMatch naive_match(const std::vector<Detection>& dets,
                              const std::vector<LesionAnnotation>& lesions, double thr) {
  struct Gt {
    std::string lesion;
    int slice;
    Box2D box;
    bool used;
  };
  std::vector<Gt> gt;
  NaiveMatch out;
  for (const auto& l : lesions) {
    out.lesion_detected[l.lesion_id] = false;
    for (const auto& sb : l.extent) gt.push_back({l.lesion_id, sb.slice_index, sb.box, false});
  }
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score_order(dets[a], dets[b]);
  });
  out.tp.assign(dets.size(), false);
  for (std::size_t k : order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].used || gt[g].slice != dets[k].slice_index) continue;
      const double v = closed_form_iou(dets[k].box, gt[g].box);
      if (v < thr || v == 0.0) continue;
      const auto key = [&](std::size_t i) {
        return std::make_tuple(gt[i].box.x1(), gt[i].box.y1(), gt[i].box.x2(), gt[i].box.y2(), gt[i].lesion);
      };
      if (v > best_iou || (v == best_iou && key(g) < key(static_cast<std::size_t>(best)))) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best < 0) continue;
    gt[static_cast<std::size_t>(best)].used = true;
    out.tp[k] = true;
    out.lesion_detected[gt[static_cast<std::size_t>(best)].lesion] = true;
  }
  return out;
}

// FROC by definition: one full re-match per distinct score threshold.
inline std::vector<FrocPoint> brute_froc(const DetectionsByVolume& dets, const LesionsByVolume& gt,
                                         double thr) {
  std::vector<double> scores;
  std::size_t lesions = 0;
  for (const auto& [id, ls] : gt) lesions += ls.size();
  for (const auto& [id, ds] : dets)
    for (const auto& d : ds) scores.push_back(d.score);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<FrocPoint> out;
  if (scores.empty()) return {{0.0, 0.0}};
  for (double s : scores) {
    std::size_t fp = 0, found = 0;
    for (const auto& [id, ls] : gt) {
      std::vector<Detection> kept;
      if (auto it = dets.find(id); it != dets.end()) {
        for (const auto& d : it->second)
          if (d.score >= s) kept.push_back(d);
      }
      const NaiveMatch m = naive_match(kept, ls, thr);
      for (bool t : m.tp) fp += !t;
      for (const auto& [lid, hit] : m.lesion_detected) found += hit;
    }
    out.push_back({static_cast<double>(fp) / static_cast<double>(gt.size()),
                   static_cast<double>(found) / static_cast<double>(lesions)});
  }
  return out;
}

// Percentile from a fully sorted copy.
inline double sorted_percentile(std::vector<double> v, double pct) {
  std::sort(v.begin(), v.end());
  const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Splits a rendered pipe table into trimmed cells, skipping the rule line.
inline std::vector<std::vector<std::string>> table_cells(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("|-", 0) == 0) continue;
    std::vector<std::string> row;
    std::size_t start = 1;
    for (std::size_t bar = line.find('|', start); bar != std::string::npos; bar = line.find('|', start)) {
      std::string cell = line.substr(start, bar - start);
      const auto b = cell.find_first_not_of(' ');
      const auto e = cell.find_last_not_of(' ');
      row.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
      start = bar + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detpost::oracle

#endif  // DETPOST_TESTS_ORACLES_HPP_
