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

#ifndef DETPOST_VOLUME_HPP_
#define DETPOST_VOLUME_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace detpost {

struct VolumeDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t slice_size() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t voxel_count() const noexcept { return slice_size() * static_cast<std::size_t>(nz); }

  friend bool operator==(const VolumeDims&, const VolumeDims&) = default;
};

// Ingest bounds on volume dimensions.
inline constexpr int kMinInPlane = 64;
inline constexpr int kMaxInPlane = 4096;
inline constexpr int kMinSlices = 1;
inline constexpr int kMaxSlices = 2048;

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

/// Scalar volume stored slice-major: voxel (x, y, z) lives at
/// z * nx * ny + y * nx + x.
class Volume {
 public:
  /// Throws ContractViolation on out-of-bounds dims, a voxel count that does
  /// not match them, or non-finite values.
  Volume(VolumeDims dims, std::vector<double> voxels);

  const VolumeDims& dims() const noexcept { return dims_; }
  std::span<const double> voxels() const noexcept { return voxels_; }
  std::span<const double> slice(int z) const;

  /// Set by percentile_normalize.
  const std::optional<ValueRange>& value_range() const noexcept { return value_range_; }
  void set_value_range(ValueRange range) { value_range_ = range; }

 private:
  VolumeDims dims_;
  std::vector<double> voxels_;
  std::optional<ValueRange> value_range_;
};

/// Percentile as a linearly interpolated order statistic: with the values
/// sorted ascending and rank r = pct / 100 * (n - 1), the result is
/// v[floor(r)] + frac(r) * (v[floor(r) + 1] - v[floor(r)]).
double percentile(std::span<const double> values, double pct);

/// Clips to the [lo_pct, hi_pct] percentiles and maps that range affinely
/// onto [0, 1]. A degenerate range maps everything to 0.
std::vector<double> normalize_intensities(std::span<const double> values, double lo_pct = 1.0,
                                          double hi_pct = 99.0);

/// Per-volume percentile normalization; records the output value range.
Volume percentile_normalize(const Volume& v, double lo_pct = 1.0, double hi_pct = 99.0);

/// Three consecutive slices centred on `center_index`.
struct SliceWindow {
  int center_index = 0;
  std::array<std::vector<double>, 3> channels;  // previous, center, next
};

/// One window per slice; neighbours past either end replicate the edge slice.
std::vector<SliceWindow> make_slice_windows(const Volume& v);

}  // namespace detpost

#endif  // DETPOST_VOLUME_HPP_
