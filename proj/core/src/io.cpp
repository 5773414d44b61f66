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

#include "detpost/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string_view>
#include <tuple>

#include "detpost/error.hpp"
#include "json.hpp"

namespace detpost {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError(path.string(), 0, "", "cannot open file for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw InputError(path.string(), 0, "", "cannot open file for writing");
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// Field access on one parsed JSON Lines record.
class Record {
 public:
  Record(const std::string& source, std::size_t line, const std::string& text)
      : source_(source), line_(line) {
    try {
      value_ = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source_, line_, "", std::string("malformed JSON: ") + e.what());
    }
    if (!value_.is_object()) throw ParseError(source_, line_, "", "record is not a JSON object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, v] : value_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(key, "unexpected field");
    }
  }

  bool has(const char* key) const { return value_.contains(key); }

  const json& get(const char* key) const {
    const auto it = value_.find(key);
    if (it == value_.end()) fail(key, "missing required field");
    return *it;
  }

  std::string string_field(const char* key) const {
    const json& v = get(key);
    if (!v.is_string()) fail(key, "expected a string");
    std::string s = v.get<std::string>();
    if (s.empty()) fail(key, "must not be empty");
    return s;
  }

  int index_field(const char* key) const {
    const json& v = get(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) fail(key, "integer too large");
      return static_cast<int>(u);
    }
    const auto i = v.get<std::int64_t>();
    if (i < 0) fail(key, "must be non-negative");
    if (i > std::numeric_limits<int>::max()) fail(key, "integer too large");
    return static_cast<int>(i);
  }

  static bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

  double number_field(const char* key) const {
    const json& v = get(key);
    if (!finite_number(v)) fail(key, "expected a finite number");
    return v.get<double>();
  }

  Box2D bbox_field(const char* key) const {
    const json& v = get(key);
    if (!v.is_array() || v.size() != 4) fail(key, "expected [x1, y1, x2, y2]");
    std::array<double, 4> c{};
    for (std::size_t i = 0; i < 4; ++i) {
      if (!finite_number(v[i])) fail(key, "coordinates must be finite numbers");
      c[i] = v[i].get<double>();
    }
    auto box = Box2D::make(c[0], c[1], c[2], c[3]);
    if (!box) fail(key, "box requires x2 > x1 and y2 > y1");
    return *box;
  }

  [[noreturn]] void fail(std::string_view field, const std::string& message) const {
    throw ValidationError(source_, line_, std::string(field), message);
  }

  [[noreturn]] void dangling(std::string_view field, const std::string& message) const {
    throw DanglingReference(source_, line_, std::string(field), message);
  }

  void check_reference(const VolumeIndex& inventory, const std::string& volume_id, int slice) const {
    const auto it = inventory.find(volume_id);
    if (it == inventory.end()) dangling("volume_id", "unknown volume '" + volume_id + "'");
    if (slice >= it->second) {
      dangling("slice_index", "slice " + std::to_string(slice) + " outside volume '" + volume_id +
                                  "' with " + std::to_string(it->second) + " slices");
    }
  }

 private:
  const std::string& source_;
  std::size_t line_;
  json value_;
};

template <typename OnRecord>
void for_each_record(std::istream& in, const std::string& source, OnRecord&& on_record) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    on_record(Record(source, line, text), line);
  }
  if (in.bad()) throw InputError(source, line, "", "read failure");
}

ordered_json box_json(const Box2D& b) { return ordered_json::array({b.x1(), b.y1(), b.x2(), b.y2()}); }

}  // namespace

VolumeIndex slice_counts(const VolumeInventory& inventory) {
  VolumeIndex index;
  for (const auto& [id, dims] : inventory) index.emplace(id, dims.nz);
  return index;
}

VolumeInventory parse_volume_inventory(std::istream& in, const std::string& source) {
  VolumeInventory inventory;
  for_each_record(in, source, [&](const Record& r, std::size_t) {
    r.allow_only({"volume_id", "dims"});
    std::string id = r.string_field("volume_id");
    const json& dims = r.get("dims");
    if (!dims.is_array() || dims.size() != 3) r.fail("dims", "expected [nx, ny, nz]");
    std::array<int, 3> d{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!dims[i].is_number_integer() || dims[i].get<std::int64_t>() < 1 ||
          dims[i].get<std::int64_t>() > std::numeric_limits<int>::max()) {
        r.fail("dims", "dimensions must be positive integers");
      }
      d[i] = static_cast<int>(dims[i].get<std::int64_t>());
    }
    if (!inventory.emplace(std::move(id), VolumeDims{d[0], d[1], d[2]}).second) {
      r.fail("volume_id", "duplicate volume");
    }
  });
  return inventory;
}

VolumeInventory parse_volume_inventory(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_volume_inventory(in, path.string());
}

DetectionDataset parse_detections(std::istream& in, const std::string& source,
                                  const VolumeIndex& inventory) {
  DetectionDataset dataset;
  dataset.volume_index = inventory;
  for_each_record(in, source, [&](const Record& r, std::size_t) {
    r.allow_only({"volume_id", "slice_index", "bbox", "score", "model_id", "label"});
    std::string volume_id = r.string_field("volume_id");
    const int slice = r.index_field("slice_index");
    const Box2D box = r.bbox_field("bbox");
    const double score = r.number_field("score");
    if (!(score >= 0.0 && score <= 1.0)) r.fail("score", "score must lie in [0, 1]");
    std::string model_id = r.string_field("model_id");
    std::string label = r.has("label") ? r.string_field("label") : std::string(kDefaultLabel);
    r.check_reference(inventory, volume_id, slice);
    dataset.records.push_back(
        Detection{box, score, std::move(model_id), std::move(volume_id), slice, std::move(label)});
  });
  return dataset;
}

DetectionDataset parse_detections(const std::filesystem::path& path, const VolumeIndex& inventory) {
  auto in = open_input(path);
  return parse_detections(in, path.string(), inventory);
}

AnnotationDataset parse_annotations(std::istream& in, const std::string& source,
                                    const VolumeIndex& inventory) {
  AnnotationDataset dataset;
  dataset.volume_index = inventory;
  std::map<std::pair<std::string, std::string>, std::size_t> lesion_slot;
  std::set<std::tuple<std::string, std::string, int>> seen;
  for_each_record(in, source, [&](const Record& r, std::size_t) {
    r.allow_only({"volume_id", "lesion_id", "slice_index", "bbox"});
    std::string volume_id = r.string_field("volume_id");
    std::string lesion_id = r.string_field("lesion_id");
    const int slice = r.index_field("slice_index");
    const Box2D box = r.bbox_field("bbox");
    r.check_reference(inventory, volume_id, slice);
    if (!seen.emplace(volume_id, lesion_id, slice).second) {
      r.fail("slice_index", "lesion '" + lesion_id + "' already has a box on slice " +
                                std::to_string(slice));
    }
    auto [it, inserted] = lesion_slot.try_emplace({volume_id, lesion_id}, dataset.lesions.size());
    if (inserted) dataset.lesions.push_back(LesionAnnotation{lesion_id, volume_id, {}});
    dataset.lesions[it->second].extent.push_back(SliceBox{slice, box});
  });
  return dataset;
}

AnnotationDataset parse_annotations(const std::filesystem::path& path, const VolumeIndex& inventory) {
  auto in = open_input(path);
  return parse_annotations(in, path.string(), inventory);
}

std::string format_detection(const Detection& d) {
  ordered_json j;
  j["volume_id"] = d.volume_id;
  j["slice_index"] = d.slice_index;
  j["bbox"] = box_json(d.box);
  j["score"] = d.score;
  j["model_id"] = d.model_id;
  j["label"] = d.label;
  return j.dump();
}

void write_detections(std::ostream& out, std::span<const Detection> records) {
  for (const auto& d : records) out << format_detection(d) << '\n';
}

void write_detections(const std::filesystem::path& path, std::span<const Detection> records) {
  auto out = open_output(path);
  write_detections(out, records);
}

void write_annotations(std::ostream& out, std::span<const LesionAnnotation> lesions) {
  for (const auto& lesion : lesions) {
    for (const auto& sb : lesion.extent) {
      ordered_json j;
      j["volume_id"] = lesion.volume_id;
      j["lesion_id"] = lesion.lesion_id;
      j["slice_index"] = sb.slice_index;
      j["bbox"] = box_json(sb.box);
      out << j.dump() << '\n';
    }
  }
}

void write_annotations(const std::filesystem::path& path, std::span<const LesionAnnotation> lesions) {
  auto out = open_output(path);
  write_annotations(out, lesions);
}

void write_volume_inventory(std::ostream& out, const VolumeInventory& inventory) {
  for (const auto& [id, dims] : inventory) {
    ordered_json j;
    j["volume_id"] = id;
    j["dims"] = ordered_json::array({dims.nx, dims.ny, dims.nz});
    out << j.dump() << '\n';
  }
}

void write_volume_inventory(const std::filesystem::path& path, const VolumeInventory& inventory) {
  auto out = open_output(path);
  write_volume_inventory(out, inventory);
}

Volume read_tvol(std::istream& in, const std::string& source) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError(source, 1, "", "missing .tvol header line");
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, "", std::string("malformed .tvol header: ") + e.what());
  }
  if (!header.is_object()) throw ParseError(source, 1, "", ".tvol header is not a JSON object");
  const auto dims_it = header.find("dims");
  if (dims_it == header.end() || !dims_it->is_array() || dims_it->size() != 3) {
    throw ValidationError(source, 1, "dims", "expected [nx, ny, nz]");
  }
  std::array<int, 3> d{};
  for (std::size_t i = 0; i < 3; ++i) {
    const json& v = (*dims_it)[i];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > (1 << 20)) {
      throw ValidationError(source, 1, "dims", "dimensions must be positive integers");
    }
    d[i] = static_cast<int>(v.get<std::int64_t>());
  }
  if (header.value("dtype", "") != "f32le") {
    throw ValidationError(source, 1, "dtype", "only \"f32le\" payloads are supported");
  }
  if (header.value("layout", "") != "slice-major") {
    throw ValidationError(source, 1, "layout", "only \"slice-major\" layout is supported");
  }
  const VolumeDims dims{d[0], d[1], d[2]};
  const std::size_t count = dims.voxel_count();
  std::vector<char> raw(count * 4);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ParseError(source, 2, "", "payload truncated: expected " + std::to_string(raw.size()) +
                                        " bytes, got " + std::to_string(in.gcount()));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(source, 2, "", "trailing bytes after payload");
  }
  std::vector<double> voxels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* b = reinterpret_cast<const unsigned char*>(raw.data() + 4 * i);
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    voxels[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  try {
    return Volume(dims, std::move(voxels));
  } catch (const ContractViolation& e) {
    throw ValidationError(source, 1, "dims", e.what());
  }
}

Volume read_tvol(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  return read_tvol(in, path.string());
}

void write_tvol(std::ostream& out, const Volume& v) {
  ordered_json header;
  header["dims"] = ordered_json::array({v.dims().nx, v.dims().ny, v.dims().nz});
  header["dtype"] = "f32le";
  header["layout"] = "slice-major";
  out << header.dump() << '\n';
  std::vector<char> raw(v.voxels().size() * 4);
  for (std::size_t i = 0; i < v.voxels().size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v.voxels()[i]));
    for (int k = 0; k < 4; ++k) raw[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

void write_tvol(const std::filesystem::path& path, const Volume& v) {
  auto out = open_output(path, std::ios::out | std::ios::binary);
  write_tvol(out, v);
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

void write_froc_csv(std::ostream& out, const FrocCurve& curve) {
  out << "mean_fp_per_volume,sensitivity\n";
  for (const auto& p : curve.points) {
    out << format_double(p.mean_fp_per_volume) << ',' << format_double(p.sensitivity) << '\n';
  }
}

FrocCurve read_froc_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != "mean_fp_per_volume,sensitivity") {
    throw ParseError(source, 1, "", "expected header 'mean_fp_per_volume,sensitivity'");
  }
  FrocCurve curve;
  std::size_t n = 1;
  const auto parse = [&](std::string_view text, const char* field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(source, n, field, "not a number: '" + std::string(text) + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++n;
    if (blank(line)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(source, n, "", "expected two columns");
    const std::string_view view(line);
    curve.points.push_back({parse(view.substr(0, comma), "mean_fp_per_volume"),
                            parse(view.substr(comma + 1), "sensitivity")});
  }
  return curve;
}

void froc_dump(const FrocCurve& curve, const std::filesystem::path& path) {
  if (curve.points.empty()) throw ContractViolation("froc_dump: empty curve");
  auto out = open_output(path);
  write_froc_csv(out, curve);
  if (!out) throw InputError(path.string(), 0, "", "write failure");
}

}  // namespace detpost
