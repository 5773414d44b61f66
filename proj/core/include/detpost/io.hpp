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

#ifndef DETPOST_IO_HPP_
#define DETPOST_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "detpost/dataset.hpp"
#include "detpost/evaluation.hpp"
#include "detpost/volume.hpp"

namespace detpost {

/// volume_id -> dims, as listed in a volumes inventory file.
using VolumeInventory = std::map<std::string, VolumeDims>;

VolumeIndex slice_counts(const VolumeInventory& inventory);

// JSON Lines readers. `source` names the input in error messages. Blank lines
// are skipped; every other line must hold exactly one record. Errors derive
// from InputError and carry the 1-based line and the offending field.

VolumeInventory parse_volume_inventory(std::istream& in, const std::string& source);
VolumeInventory parse_volume_inventory(const std::filesystem::path& path);

DetectionDataset parse_detections(std::istream& in, const std::string& source,
                                  const VolumeIndex& inventory);
DetectionDataset parse_detections(const std::filesystem::path& path, const VolumeIndex& inventory);

/// Rows sharing (volume_id, lesion_id) are grouped into one lesion, in order
/// of first appearance; a repeated (volume_id, lesion_id, slice_index) is a
/// ValidationError.
AnnotationDataset parse_annotations(std::istream& in, const std::string& source,
                                    const VolumeIndex& inventory);
AnnotationDataset parse_annotations(const std::filesystem::path& path, const VolumeIndex& inventory);

// Canonical writers: fixed key order, shortest round-trip numbers, one record
// per line. Parsing their output and writing it again is the identity.

std::string format_detection(const Detection& d);
void write_detections(std::ostream& out, std::span<const Detection> records);
void write_detections(const std::filesystem::path& path, std::span<const Detection> records);

void write_annotations(std::ostream& out, std::span<const LesionAnnotation> lesions);
void write_annotations(const std::filesystem::path& path, std::span<const LesionAnnotation> lesions);

void write_volume_inventory(std::ostream& out, const VolumeInventory& inventory);
void write_volume_inventory(const std::filesystem::path& path, const VolumeInventory& inventory);

// .tvol: one JSON header line {"dims":[nx,ny,nz],"dtype":"f32le","layout":"slice-major"}
// followed by nx*ny*nz little-endian float32 values.

Volume read_tvol(std::istream& in, const std::string& source);
Volume read_tvol(const std::filesystem::path& path);
void write_tvol(std::ostream& out, const Volume& v);
void write_tvol(const std::filesystem::path& path, const Volume& v);

// FROC curve as CSV with header "mean_fp_per_volume,sensitivity".

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

void write_froc_csv(std::ostream& out, const FrocCurve& curve);
FrocCurve read_froc_csv(std::istream& in, const std::string& source);
void froc_dump(const FrocCurve& curve, const std::filesystem::path& path);

}  // namespace detpost

#endif  // DETPOST_IO_HPP_
