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

#ifndef DETPOST_DATASET_HPP_
#define DETPOST_DATASET_HPP_

#include <map>
#include <string>
#include <vector>

#include "detpost/detection.hpp"

namespace detpost {

/// volume_id -> number of slices.
using VolumeIndex = std::map<std::string, int>;

using DetectionsByVolume = std::map<std::string, std::vector<Detection>>;
using LesionsByVolume = std::map<std::string, std::vector<LesionAnnotation>>;

struct DetectionDataset {
  std::vector<Detection> records;  // input order
  VolumeIndex volume_index;

  /// Records sorted by (volume_id, slice_index) then score_order.
  std::vector<Detection> canonical() const;

  /// Throws ReferentialError for an unknown volume or out-of-range slice.
  void check_references() const;
};

struct AnnotationDataset {
  std::vector<LesionAnnotation> lesions;  // order of first appearance
  VolumeIndex volume_index;

  void check_references() const;
};

/// Canonical (volume_id, slice_index, score-desc) order.
bool canonical_order(const Detection& a, const Detection& b) noexcept;

/// Groups detections by volume; every volume in `inventory` gets an entry.
DetectionsByVolume group_by_volume(const std::vector<Detection>& records,
                                   const VolumeIndex& inventory);

/// Groups lesions by volume; every volume in `inventory` gets an entry.
LesionsByVolume group_by_volume(const std::vector<LesionAnnotation>& lesions,
                                const VolumeIndex& inventory);

}  // namespace detpost

#endif  // DETPOST_DATASET_HPP_
