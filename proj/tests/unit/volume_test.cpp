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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "detpost/error.hpp"
#include "detpost/volume.hpp"
#include "oracles.hpp"

namespace detpost {
namespace {

std::vector<double> iota_values(int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

Volume random_volume(oracle::Gen& gen, VolumeDims dims) {
  std::vector<double> v(dims.voxel_count());
  for (auto& x : v) x = gen.real(-1000, 3000);
  return Volume(dims, std::move(v));
}

TEST(PercentileTest, OneToThousand) {
  const auto v = iota_values(1000);
  EXPECT_NEAR(percentile(v, 1.0), 10.99, 1e-9);
  EXPECT_NEAR(percentile(v, 99.0), 990.01, 1e-9);
  EXPECT_EQ(percentile(v, 0.0), 1.0);
  EXPECT_EQ(percentile(v, 100.0), 1000.0);
  EXPECT_EQ(percentile(v, 50.0), 500.5);
}

TEST(PercentileTest, MatchesSortedOracle) {
  oracle::Gen gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(gen.integer(1, 300)));
    for (auto& x : v) x = gen.real(-50, 50);
    const double pct = gen.real(0, 100);
    ASSERT_NEAR(percentile(v, pct), oracle::sorted_percentile(v, pct), 1e-12);
  }
}

TEST(PercentileTest, Errors) {
  EXPECT_THROW(percentile(std::vector<double>{}, 50.0), ContractViolation);
  EXPECT_THROW(percentile(std::vector<double>{1.0}, 101.0), ContractViolation);
  EXPECT_THROW(percentile(std::vector<double>{1.0}, -1.0), ContractViolation);
}

TEST(NormalizeTest, OneToThousand) {
  const auto out = normalize_intensities(iota_values(1000));
  EXPECT_EQ(out.front(), 0.0);
  EXPECT_EQ(out.back(), 1.0);
  EXPECT_NEAR(out[499], (500.0 - 10.99) / (990.01 - 10.99), 1e-12);
  EXPECT_NEAR(out[499], 0.49949, 1e-5);
}

TEST(NormalizeTest, ConstantMapsToZero) {
  const std::vector<double> v(500, 7.25);
  for (double x : normalize_intensities(v)) EXPECT_EQ(x, 0.0);
}

TEST(NormalizeTest, RangeMonotoneAndIdempotent) {
  oracle::Gen gen(102);
  std::vector<double> v(10001);
  for (auto& x : v) x = gen.real(-1, 1);
  const auto once = normalize_intensities(v);
  for (double x : once) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] < v[i + 1]) ASSERT_LE(once[i], once[i + 1]);
  }
  const auto twice = normalize_intensities(once);
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(twice[i], once[i], 1e-9);
}

TEST(NormalizeTest, AgreesWithOracle) {
  oracle::Gen gen(103);
  for (int trial = 0; trial < 20; ++trial) {
    const Volume vol = random_volume(gen, {64, 64, gen.integer(1, 4)});
    const Volume out = percentile_normalize(vol);
    std::vector<double> raw(vol.voxels().begin(), vol.voxels().end());
    const double lo = oracle::sorted_percentile(raw, 1.0);
    const double hi = oracle::sorted_percentile(raw, 99.0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double expected = (std::clamp(raw[i], lo, hi) - lo) / (hi - lo);
      ASSERT_NEAR(out.voxels()[i], expected, 1e-9);
    }
    ASSERT_TRUE(out.value_range().has_value());
    EXPECT_GE(out.value_range()->min, 0.0);
    EXPECT_LE(out.value_range()->max, 1.0);
    EXPECT_EQ(out.dims(), vol.dims());
  }
}

TEST(VolumeTest, DimsAndValuesAreChecked) {
  EXPECT_THROW(Volume({63, 64, 1}, std::vector<double>(63 * 64)), ContractViolation);
  EXPECT_THROW(Volume({64, 64, 0}, {}), ContractViolation);
  EXPECT_THROW(Volume({64, 64, 1}, std::vector<double>(10)), ContractViolation);
  std::vector<double> bad(64 * 64, 0.0);
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Volume({64, 64, 1}, bad), ContractViolation);
  const Volume ok({64, 64, 2}, std::vector<double>(64 * 64 * 2, 1.0));
  EXPECT_EQ(ok.slice(1).size(), 64u * 64u);
  EXPECT_THROW(ok.slice(2), ContractViolation);
}

Volume slice_labelled(int nz) {
  const VolumeDims dims{64, 64, nz};
  std::vector<double> v(dims.voxel_count());
  for (int z = 0; z < nz; ++z) {
    std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(dims.slice_size()) * z, dims.slice_size(),
                static_cast<double>(z));
  }
  return Volume(dims, std::move(v));
}

std::array<double, 3> window_labels(const SliceWindow& w) {
  return {w.channels[0][0], w.channels[1][0], w.channels[2][0]};
}

TEST(SliceWindowTest, SingleSliceReplicates) {
  const auto ws = make_slice_windows(slice_labelled(1));
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(window_labels(ws[0]), (std::array<double, 3>{0, 0, 0}));
}

TEST(SliceWindowTest, ThreeAndFiveSlices) {
  const auto three = make_slice_windows(slice_labelled(3));
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(window_labels(three[0]), (std::array<double, 3>{0, 0, 1}));
  EXPECT_EQ(window_labels(three[1]), (std::array<double, 3>{0, 1, 2}));
  EXPECT_EQ(window_labels(three[2]), (std::array<double, 3>{1, 2, 2}));
  const auto five = make_slice_windows(slice_labelled(5));
  ASSERT_EQ(five.size(), 5u);
  EXPECT_EQ(window_labels(five[4]), (std::array<double, 3>{3, 4, 4}));
  EXPECT_EQ(five[2].center_index, 2);
}

TEST(SliceWindowTest, CentersReconstructVolume) {
  oracle::Gen gen(104);
  for (int nz : {1, 2, 3, 7}) {
    const Volume vol = random_volume(gen, {64, 80, nz});
    const auto ws = make_slice_windows(vol);
    std::vector<double> rebuilt;
    for (const auto& w : ws) {
      for (const auto& ch : w.channels) ASSERT_EQ(ch.size(), vol.dims().slice_size());
      rebuilt.insert(rebuilt.end(), w.channels[1].begin(), w.channels[1].end());
    }
    ASSERT_TRUE(std::equal(rebuilt.begin(), rebuilt.end(), vol.voxels().begin(), vol.voxels().end()));
  }
}

}  // namespace
}  // namespace detpost
