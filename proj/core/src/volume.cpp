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

#include "detpost/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detpost/error.hpp"

namespace detpost {

Volume::Volume(VolumeDims dims, std::vector<double> voxels)
    : dims_(dims), voxels_(std::move(voxels)) {
  const auto in = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
  if (!in(dims.nx, kMinInPlane, kMaxInPlane) || !in(dims.ny, kMinInPlane, kMaxInPlane) ||
      !in(dims.nz, kMinSlices, kMaxSlices)) {
    throw ContractViolation("volume dims " + std::to_string(dims.nx) + "x" + std::to_string(dims.ny) +
                            "x" + std::to_string(dims.nz) + " outside accepted bounds");
  }
  if (voxels_.size() != dims.voxel_count()) {
    throw ContractViolation("volume has " + std::to_string(voxels_.size()) + " voxels, dims imply " +
                            std::to_string(dims.voxel_count()));
  }
  if (!std::all_of(voxels_.begin(), voxels_.end(), [](double v) { return std::isfinite(v); })) {
    throw ContractViolation("volume contains non-finite voxel values");
  }
}

std::span<const double> Volume::slice(int z) const {
  if (z < 0 || z >= dims_.nz) throw ContractViolation("slice index " + std::to_string(z) + " out of range");
  return std::span<const double>(voxels_).subspan(static_cast<std::size_t>(z) * dims_.slice_size(),
                                                  dims_.slice_size());
}

double percentile(std::span<const double> values, double pct) {
  if (values.empty()) throw ContractViolation("percentile of an empty set");
  if (!(pct >= 0.0 && pct <= 100.0)) throw ContractViolation("percentile outside [0, 100]");
  std::vector<double> work(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(work.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(k);
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), work.end());
  const double lower = work[k];
  if (frac == 0.0 || k + 1 >= work.size()) return lower;
  const double upper = *std::min_element(work.begin() + static_cast<std::ptrdiff_t>(k + 1), work.end());
  return lower + frac * (upper - lower);
}

std::vector<double> normalize_intensities(std::span<const double> values, double lo_pct,
                                          double hi_pct) {
  if (values.empty()) throw ContractViolation("cannot normalize an empty volume");
  if (!(lo_pct < hi_pct)) throw ContractViolation("normalization requires lo_pct < hi_pct");
  const double lo = percentile(values, lo_pct);
  const double hi = percentile(values, hi_pct);
  std::vector<double> out(values.size(), 0.0);
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (std::clamp(values[i], lo, hi) - lo) / range;
  }
  return out;
}

Volume percentile_normalize(const Volume& v, double lo_pct, double hi_pct) {
  std::vector<double> out = normalize_intensities(v.voxels(), lo_pct, hi_pct);
  const auto [mn, mx] = std::minmax_element(out.begin(), out.end());
  const ValueRange range{*mn, *mx};
  Volume result(v.dims(), std::move(out));
  result.set_value_range(range);
  return result;
}

std::vector<SliceWindow> make_slice_windows(const Volume& v) {
  const int nz = v.dims().nz;
  std::vector<SliceWindow> windows;
  windows.reserve(static_cast<std::size_t>(nz));
  const auto copy = [&](int z) {
    const auto s = v.slice(std::clamp(z, 0, nz - 1));
    return std::vector<double>(s.begin(), s.end());
  };
  for (int z = 0; z < nz; ++z) {
    windows.push_back({z, {copy(z - 1), copy(z), copy(z + 1)}});
  }
  return windows;
}

}  // namespace detpost
