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

#ifndef DETPOST_SYNTH_HPP_
#define DETPOST_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "detpost/dataset.hpp"
#include "detpost/io.hpp"
#include "detpost/volume.hpp"

namespace detpost {

struct ScoreRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct IntRange {
  int lo = 1;
  int hi = 1;
};

/// One simulated detector.
///
/// Counts are realized exactly: round(hit_probability * lesions) lesions are
/// hit (one TP on every slice of their extent) and round(fp_per_volume *
/// n_volumes) false positives are spread over the volumes.
struct DetectorProfile {
  std::string model_id;
  double hit_probability = 1.0;
  double fp_per_volume = 0.0;
  ScoreRange tp_scores{0.5, 1.0};
  ScoreRange fp_scores{0.01, 0.49};
};

struct SynthConfig {
  int n_volumes = 122;
  IntRange lesions_per_volume{1, 4};
  IntRange slices_per_lesion{1, 5};
  VolumeDims image_dims{256, 256, 32};
  std::vector<DetectorProfile> detector_profiles;
  std::uint64_t seed = 0;

  /// Throws ContractViolation for out-of-range probabilities, rates, ranges
  /// or dims, and for duplicate model ids.
  void validate() const;
};

/// Realized counts of one detector's synthetic output.
struct ExpectedStats {
  std::size_t n_volumes = 0;
  std::size_t n_lesions = 0;
  std::size_t n_gt_boxes = 0;
  std::size_t detected_lesions = 0;
  std::size_t tp_boxes = 0;
  std::size_t fp_count = 0;

  double sensitivity() const { return static_cast<double>(detected_lesions) / static_cast<double>(n_lesions); }
  double mean_fp_per_volume() const { return static_cast<double>(fp_count) / static_cast<double>(n_volumes); }
  double box_recall() const { return static_cast<double>(tp_boxes) / static_cast<double>(n_gt_boxes); }
};

struct SynthOutput {
  VolumeInventory volumes;
  AnnotationDataset annotations;
  std::map<std::string, DetectionDataset> detections;  // by model_id
  std::map<std::string, ExpectedStats> expected;      // by model_id
};

/// Deterministic synthetic ground truth and detections.
///
/// Lesions of a volume occupy distinct cells of a 64-pixel grid, so their
/// boxes never overlap. Every TP is a jittered copy of its GT box with
/// IoU >= 0.25 and every FP has zero overlap with all GT boxes on its slice;
/// both are re-checked as records are emitted. Throws CapacityError when the
/// grid or slice count cannot host the requested lesions.
SynthOutput synth_generate(const SynthConfig& cfg);

/// Reads a SynthConfig from JSON; absent keys keep their defaults.
SynthConfig parse_synth_config(std::string_view text, const std::string& source);

/// Writes volumes.jsonl, annotations.jsonl, detections_<model>.jsonl and
/// expected.json into `dir`.
void write_synth_output(const SynthOutput& out, const std::filesystem::path& dir);

}  // namespace detpost

#endif  // DETPOST_SYNTH_HPP_
