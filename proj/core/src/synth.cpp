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

#include "detpost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "detpost/error.hpp"
#include "detpost/geometry.hpp"
#include "json.hpp"

namespace detpost {

namespace {

constexpr int kCell = 64;
constexpr double kMinTpIou = 0.25;
constexpr int kFpPlacementTries = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform draws over mt19937_64 with portable, hand-written distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  int integer(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return lo + static_cast<int>(x % span);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(integer(0, static_cast<int>(i - 1)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

double half_pixel(double v) { return std::round(v * 2.0) / 2.0; }
double score_digits(double v) { return std::round(v * 1e4) / 1e4; }

struct CellBounds {
  double x0, y0;
};

Box2D clamp_to_cell(double x1, double y1, double w, double h, const CellBounds& cell) {
  x1 = std::clamp(x1, cell.x0 + 1.0, cell.x0 + kCell - 1.0 - w);
  y1 = std::clamp(y1, cell.y0 + 1.0, cell.y0 + kCell - 1.0 - h);
  return Box2D(x1, y1, x1 + w, y1 + h);
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

struct PlacedLesion {
  std::size_t volume;
  CellBounds cell;
  LesionAnnotation annotation;
};

void check_range(const ScoreRange& r, const std::string& what) {
  if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= 1.0)) {
    throw ContractViolation(what + " must satisfy 0 <= lo <= hi <= 1");
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (n_volumes < 1) throw ContractViolation("n_volumes must be at least 1");
  if (lesions_per_volume.lo < 0 || lesions_per_volume.lo > lesions_per_volume.hi) {
    throw ContractViolation("lesions_per_volume must satisfy 0 <= lo <= hi");
  }
  if (slices_per_lesion.lo < 1 || slices_per_lesion.lo > slices_per_lesion.hi) {
    throw ContractViolation("slices_per_lesion must satisfy 1 <= lo <= hi");
  }
  if (image_dims.nx < kCell || image_dims.ny < kCell || image_dims.nz < 1) {
    throw ContractViolation("image_dims must be at least 64 x 64 x 1");
  }
  std::set<std::string> ids;
  for (const auto& p : detector_profiles) {
    if (p.model_id.empty()) throw ContractViolation("detector profile without model_id");
    if (!ids.insert(p.model_id).second) throw ContractViolation("duplicate model_id '" + p.model_id + "'");
    if (!(p.hit_probability >= 0.0 && p.hit_probability <= 1.0)) {
      throw ContractViolation("hit_probability of '" + p.model_id + "' outside [0, 1]");
    }
    if (!(p.fp_per_volume >= 0.0) || !std::isfinite(p.fp_per_volume)) {
      throw ContractViolation("fp_per_volume of '" + p.model_id + "' must be a non-negative number");
    }
    check_range(p.tp_scores, "tp_scores of '" + p.model_id + "'");
    check_range(p.fp_scores, "fp_scores of '" + p.model_id + "'");
  }
}

SynthOutput synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const int cells_x = cfg.image_dims.nx / kCell;
  const int cells_y = cfg.image_dims.ny / kCell;
  const int n_cells = cells_x * cells_y;
  if (cfg.lesions_per_volume.hi > n_cells) {
    throw CapacityError("cannot place " + std::to_string(cfg.lesions_per_volume.hi) +
                        " disjoint lesions on a grid of " + std::to_string(n_cells) + " cells");
  }
  if (cfg.slices_per_lesion.hi > cfg.image_dims.nz) {
    throw CapacityError("lesions of " + std::to_string(cfg.slices_per_lesion.hi) +
                        " slices do not fit in " + std::to_string(cfg.image_dims.nz) + " slices");
  }

  SynthOutput out;
  Rng rng(cfg.seed);
  std::vector<std::string> volume_ids;
  for (int v = 0; v < cfg.n_volumes; ++v) {
    volume_ids.push_back(numbered("vol", static_cast<std::size_t>(v), 4));
    out.volumes.emplace(volume_ids.back(), cfg.image_dims);
  }
  const VolumeIndex index = slice_counts(out.volumes);

  std::vector<PlacedLesion> placed;
  std::vector<int> cell_ids(static_cast<std::size_t>(n_cells));
  for (std::size_t v = 0; v < volume_ids.size(); ++v) {
    const int count = rng.integer(cfg.lesions_per_volume.lo, cfg.lesions_per_volume.hi);
    std::iota(cell_ids.begin(), cell_ids.end(), 0);
    rng.shuffle(cell_ids);
    for (int j = 0; j < count; ++j) {
      const int c = cell_ids[static_cast<std::size_t>(j)];
      const CellBounds cell{static_cast<double>((c % cells_x) * kCell),
                            static_cast<double>((c / cells_x) * kCell)};
      const int len = rng.integer(cfg.slices_per_lesion.lo, cfg.slices_per_lesion.hi);
      const int start = rng.integer(0, cfg.image_dims.nz - len);
      const double w = half_pixel(rng.uniform(16.0, 40.0));
      const double h = half_pixel(rng.uniform(16.0, 40.0));
      const double x = half_pixel(cell.x0 + 4.0 + rng.uniform() * (kCell - 8.0 - w));
      const double y = half_pixel(cell.y0 + 4.0 + rng.uniform() * (kCell - 8.0 - h));
      LesionAnnotation lesion{numbered("L", static_cast<std::size_t>(j), 2), volume_ids[v], {}};
      for (int z = start; z < start + len; ++z) {
        const double dx = half_pixel(rng.uniform(-2.0, 2.0));
        const double dy = half_pixel(rng.uniform(-2.0, 2.0));
        lesion.extent.push_back({z, clamp_to_cell(x + dx, y + dy, w, h, cell)});
      }
      out.annotations.lesions.push_back(lesion);
      placed.push_back({v, cell, std::move(lesion)});
    }
  }
  out.annotations.volume_index = index;

  // Same-slice GT boxes, per volume, for the FP guard.
  std::vector<std::vector<std::vector<const Box2D*>>> gt_on_slice(
      volume_ids.size(), std::vector<std::vector<const Box2D*>>(static_cast<std::size_t>(cfg.image_dims.nz)));
  std::size_t n_boxes = 0;
  for (const auto& p : placed) {
    for (const auto& sb : p.annotation.extent) {
      gt_on_slice[p.volume][static_cast<std::size_t>(sb.slice_index)].push_back(&sb.box);
      ++n_boxes;
    }
  }

  for (std::size_t pi = 0; pi < cfg.detector_profiles.size(); ++pi) {
    const DetectorProfile& profile = cfg.detector_profiles[pi];
    Rng prng(cfg.seed ^ splitmix64(0xD1B54A32D192ED03ull + pi));
    DetectionDataset dataset;
    dataset.volume_index = index;
    ExpectedStats stats;
    stats.n_volumes = volume_ids.size();
    stats.n_lesions = placed.size();
    stats.n_gt_boxes = n_boxes;

    const auto hits = static_cast<std::size_t>(
        std::llround(profile.hit_probability * static_cast<double>(placed.size())));
    std::vector<std::size_t> order(placed.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    prng.shuffle(order);
    std::vector<bool> is_hit(placed.size(), false);
    for (std::size_t k = 0; k < hits; ++k) is_hit[order[k]] = true;

    for (std::size_t li = 0; li < placed.size(); ++li) {
      if (!is_hit[li]) continue;
      const PlacedLesion& p = placed[li];
      for (const auto& sb : p.annotation.extent) {
        const Box2D& gt = sb.box;
        const double w = half_pixel(gt.width() * (1.0 + prng.uniform(-0.1, 0.1)));
        const double h = half_pixel(gt.height() * (1.0 + prng.uniform(-0.1, 0.1)));
        const double x = half_pixel(gt.x1() + gt.width() * prng.uniform(-0.1, 0.1));
        const double y = half_pixel(gt.y1() + gt.height() * prng.uniform(-0.1, 0.1));
        Box2D box = clamp_to_cell(x, y, w, h, p.cell);
        if (iou(box, gt) < kMinTpIou) box = gt;
        const double score = score_digits(prng.uniform(profile.tp_scores.lo, profile.tp_scores.hi));
        dataset.records.push_back(
            Detection{box, score, profile.model_id, p.annotation.volume_id, sb.slice_index, kDefaultLabel});
        ++stats.tp_boxes;
      }
      ++stats.detected_lesions;
    }

    const auto n_fp = static_cast<std::size_t>(
        std::llround(profile.fp_per_volume * static_cast<double>(volume_ids.size())));
    for (std::size_t f = 0; f < n_fp; ++f) {
      const auto v = static_cast<std::size_t>(prng.integer(0, static_cast<int>(volume_ids.size()) - 1));
      const int z = prng.integer(0, cfg.image_dims.nz - 1);
      const auto& blockers = gt_on_slice[v][static_cast<std::size_t>(z)];
      std::optional<Box2D> box;
      for (int attempt = 0; attempt < kFpPlacementTries && !box; ++attempt) {
        const double w = half_pixel(prng.uniform(12.0, 40.0));
        const double h = half_pixel(prng.uniform(12.0, 40.0));
        const double x = half_pixel(prng.uniform(0.0, cfg.image_dims.nx - w));
        const double y = half_pixel(prng.uniform(0.0, cfg.image_dims.ny - h));
        Box2D candidate(x, y, x + w, y + h);
        const bool clear = std::none_of(blockers.begin(), blockers.end(), [&](const Box2D* g) {
          return intersection_area(candidate, *g) > 0.0;
        });
        if (clear) box = candidate;
      }
      if (!box) {
        throw CapacityError("no room for a false positive on slice " + std::to_string(z) + " of " +
                            volume_ids[v]);
      }
      const double score = score_digits(prng.uniform(profile.fp_scores.lo, profile.fp_scores.hi));
      dataset.records.push_back(Detection{*box, score, profile.model_id, volume_ids[v], z, kDefaultLabel});
      ++stats.fp_count;
    }

    std::sort(dataset.records.begin(), dataset.records.end(), canonical_order);
    out.detections.emplace(profile.model_id, std::move(dataset));
    out.expected.emplace(profile.model_id, stats);
  }
  return out;
}

SynthConfig parse_synth_config(std::string_view text, const std::string& source) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, 0, "", "config must be a JSON object");
  SynthConfig cfg;
  try {
    cfg.n_volumes = j.value("n_volumes", cfg.n_volumes);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("lesions_per_volume")) {
      cfg.lesions_per_volume = {j["lesions_per_volume"].at(0).get<int>(), j["lesions_per_volume"].at(1).get<int>()};
    }
    if (j.contains("slices_per_lesion")) {
      cfg.slices_per_lesion = {j["slices_per_lesion"].at(0).get<int>(), j["slices_per_lesion"].at(1).get<int>()};
    }
    if (j.contains("image_dims")) {
      const auto& d = j["image_dims"];
      cfg.image_dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
    }
    for (const auto& p : j.value("detector_profiles", json::array())) {
      DetectorProfile profile;
      profile.model_id = p.at("model_id").get<std::string>();
      profile.hit_probability = p.value("hit_probability", profile.hit_probability);
      profile.fp_per_volume = p.value("fp_per_volume", profile.fp_per_volume);
      if (p.contains("tp_scores")) profile.tp_scores = {p["tp_scores"].at(0).get<double>(), p["tp_scores"].at(1).get<double>()};
      if (p.contains("fp_scores")) profile.fp_scores = {p["fp_scores"].at(0).get<double>(), p["fp_scores"].at(1).get<double>()};
      cfg.detector_profiles.push_back(std::move(profile));
    }
  } catch (const json::exception& e) {
    throw ValidationError(source, 0, "", std::string("bad synth config: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const ContractViolation& e) {
    throw ValidationError(source, 0, "", e.what());
  }
  return cfg;
}

void write_synth_output(const SynthOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_volume_inventory(dir / "volumes.jsonl", out.volumes);
  write_annotations(dir / "annotations.jsonl", out.annotations.lesions);
  nlohmann::ordered_json expected = nlohmann::ordered_json::object();
  for (const auto& [model, dataset] : out.detections) {
    write_detections(dir / ("detections_" + model + ".jsonl"), dataset.records);
    const ExpectedStats& s = out.expected.at(model);
    expected[model] = {{"n_volumes", s.n_volumes},
                       {"n_lesions", s.n_lesions},
                       {"n_gt_boxes", s.n_gt_boxes},
                       {"detected_lesions", s.detected_lesions},
                       {"tp_boxes", s.tp_boxes},
                       {"fp_count", s.fp_count},
                       {"sensitivity", s.n_lesions ? s.sensitivity() : 0.0},
                       {"mean_fp_per_volume", s.mean_fp_per_volume()}};
  }
  std::ofstream file(dir / "expected.json", std::ios::trunc);
  if (!file) throw InputError((dir / "expected.json").string(), 0, "", "cannot open file for writing");
  file << expected.dump(2) << '\n';
}

}  // namespace detpost
