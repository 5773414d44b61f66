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

#include "detpost/dataset.hpp"

#include <algorithm>

#include "detpost/error.hpp"

namespace detpost {

namespace {

void check_slice(const VolumeIndex& index, const std::string& volume_id, int slice,
                 const std::string& what) {
  const auto it = index.find(volume_id);
  if (it == index.end()) {
    throw ReferentialError(what + " references unknown volume '" + volume_id + "'");
  }
  if (slice < 0 || slice >= it->second) {
    throw ReferentialError(what + " slice " + std::to_string(slice) + " outside volume '" +
                           volume_id + "' with " + std::to_string(it->second) + " slices");
  }
}

}  // namespace

bool canonical_order(const Detection& a, const Detection& b) noexcept {
  if (a.volume_id != b.volume_id) return a.volume_id < b.volume_id;
  if (a.slice_index != b.slice_index) return a.slice_index < b.slice_index;
  return score_order(a, b);
}

std::vector<Detection> DetectionDataset::canonical() const {
  std::vector<Detection> out = records;
  std::sort(out.begin(), out.end(), canonical_order);
  return out;
}

void DetectionDataset::check_references() const {
  for (const auto& d : records) check_slice(volume_index, d.volume_id, d.slice_index, "detection");
}

void AnnotationDataset::check_references() const {
  for (const auto& lesion : lesions) {
    for (const auto& sb : lesion.extent) {
      check_slice(volume_index, lesion.volume_id, sb.slice_index, "lesion '" + lesion.lesion_id + "'");
    }
  }
}

DetectionsByVolume group_by_volume(const std::vector<Detection>& records,
                                   const VolumeIndex& inventory) {
  DetectionsByVolume out;
  for (const auto& [id, slices] : inventory) out[id];
  for (const auto& d : records) {
    if (!inventory.contains(d.volume_id)) {
      throw ReferentialError("detection references unknown volume '" + d.volume_id + "'");
    }
    out[d.volume_id].push_back(d);
  }
  return out;
}

LesionsByVolume group_by_volume(const std::vector<LesionAnnotation>& lesions,
                                const VolumeIndex& inventory) {
  LesionsByVolume out;
  for (const auto& [id, slices] : inventory) out[id];
  for (const auto& l : lesions) {
    if (!inventory.contains(l.volume_id)) {
      throw ReferentialError("lesion '" + l.lesion_id + "' references unknown volume '" +
                             l.volume_id + "'");
    }
    out[l.volume_id].push_back(l);
  }
  return out;
}

}  // namespace detpost
