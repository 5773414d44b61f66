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

// Command-line front end: fuse, evaluate, froc, gate, mine-negatives,
// normalize, windows, synth, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "detpost/dataset.hpp"
#include "detpost/error.hpp"
#include "detpost/evaluation.hpp"
#include "detpost/fusion.hpp"
#include "detpost/hnem.hpp"
#include "detpost/io.hpp"
#include "detpost/parallel.hpp"
#include "detpost/report.hpp"
#include "detpost/synth.hpp"
#include "detpost/volume.hpp"

namespace fs = std::filesystem;
using namespace detpost;

namespace {

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw InputError(path, 0, "", "cannot open file for writing");
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, "", "cannot open file for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Inputs {
  std::string volumes;
  std::string annotations;
  std::string detections;
};

struct EvalInputs {
  VolumeIndex index;
  LesionsByVolume gt;
  DetectionsByVolume dets;
};

EvalInputs load_eval_inputs(const Inputs& in) {
  EvalInputs out;
  out.index = slice_counts(parse_volume_inventory(fs::path(in.volumes)));
  const AnnotationDataset gt = parse_annotations(fs::path(in.annotations), out.index);
  const DetectionDataset dets = parse_detections(fs::path(in.detections), out.index);
  out.gt = group_by_volume(gt.lesions, out.index);
  out.dets = group_by_volume(dets.records, out.index);
  return out;
}

const std::map<std::string, FusionMethod> kMethods = {
    {"nms", FusionMethod::kNms}, {"soft-nms", FusionMethod::kSoftNms}, {"wbf", FusionMethod::kWbf}};
const std::map<std::string, RescaleMode> kRescale = {{"none", RescaleMode::kNone},
                                                     {"count", RescaleMode::kCountOverModels}};
const std::map<std::string, ScoreMode> kScoreModes = {{"mean", ScoreMode::kMean}, {"max", ScoreMode::kMax}};
const std::map<std::string, Interpolation> kInterp = {{"step", Interpolation::kStep},
                                                      {"linear", Interpolation::kLinear}};
const std::map<std::string, ApMode> kApModes = {{"101", ApMode::kInterp101}, {"all", ApMode::kAllPoints}};
const std::map<std::string, ReportFormat> kFormats = {
    {"table", ReportFormat::kTable}, {"csv", ReportFormat::kCsv}, {"json", ReportFormat::kJson}};

void add_eval_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--volumes", in.volumes, "Volume inventory (JSON Lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--annotations", in.annotations, "Ground-truth annotations (JSON Lines)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--detections", in.detections, "Detections (JSON Lines)")->required()->check(CLI::ExistingFile);
}

void add_eval_config(CLI::App* cmd, EvalConfig& cfg) {
  cmd->add_option("--iou-thr", cfg.iou_thr, "IoU needed for a match")->capture_default_str();
  cmd->add_option("--fp-targets", cfg.fp_targets, "Comma-separated FP-per-volume targets")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--interp", cfg.interpolation, "Sensitivity read-out: step or linear")
      ->transform(CLI::CheckedTransformer(kInterp, CLI::ignore_case));
  cmd->add_option("--ap-mode", cfg.ap_mode, "AP interpolation: 101 or all")
      ->transform(CLI::CheckedTransformer(kApModes, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detpost: detection fusion, hard-negative mining and volumetric FROC evaluation"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse detections of one or more models per slice");
  std::string fuse_volumes;
  std::vector<std::string> fuse_inputs;
  std::string fuse_output;
  FusionMethod method = FusionMethod::kWbf;
  FusionParams fusion;
  fuse_cmd->add_option("--volumes", fuse_volumes, "Volume inventory (JSON Lines)")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("detections", fuse_inputs, "One detections file per model")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--method", method, "nms, soft-nms or wbf")
      ->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case));
  fuse_cmd->add_option("--wbf-iou", fusion.iou_cluster_thr, "WBF cluster IoU threshold")->capture_default_str();
  fuse_cmd->add_option("--nms-iou", fusion.nms_iou_thr, "NMS suppression IoU threshold")->capture_default_str();
  fuse_cmd->add_option("--sigma", fusion.soft_nms_sigma, "Soft-NMS Gaussian sigma")->capture_default_str();
  fuse_cmd->add_option("--rescale", fusion.rescale_mode, "WBF score rescale: none or count")
      ->transform(CLI::CheckedTransformer(kRescale, CLI::ignore_case));
  fuse_cmd->add_option("--score-mode", fusion.score_mode, "WBF fused score: mean or max")
      ->transform(CLI::CheckedTransformer(kScoreModes, CLI::ignore_case));
  fuse_cmd->add_option("-o,--output", fuse_output, "Output detections file (default stdout)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "mAP and sensitivity at FP-per-volume targets");
  Inputs eval_in;
  EvalConfig eval_cfg;
  std::string eval_name;
  std::string eval_output;
  ReportFormat eval_format = ReportFormat::kJson;
  add_eval_inputs(eval_cmd, eval_in);
  add_eval_config(eval_cmd, eval_cfg);
  eval_cmd->add_option("--name", eval_name, "Method name in the report (default: detections file stem)");
  eval_cmd->add_option("--format", eval_format, "table, csv or json")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  eval_cmd->add_option("-o,--output", eval_output, "Output file (default stdout)");

  // froc
  auto* froc_cmd = app.add_subcommand("froc", "Dump the lesion-level FROC curve as CSV");
  Inputs froc_in;
  EvalConfig froc_cfg;
  std::string froc_output;
  add_eval_inputs(froc_cmd, froc_in);
  froc_cmd->add_option("--iou-thr", froc_cfg.iou_thr, "IoU needed for a match")->capture_default_str();
  froc_cmd->add_option("-o,--output", froc_output, "Output CSV (default stdout)");

  // gate
  auto* gate_cmd = app.add_subcommand("gate", "Select methods whose mAP exceeds a threshold");
  double gate_threshold = 45.0;
  std::vector<std::string> gate_reports;
  std::vector<std::string> gate_entries;
  gate_cmd->add_option("--threshold", gate_threshold, "mAP threshold in percent (strict)")->capture_default_str();
  gate_cmd->add_option("reports", gate_reports, "Report JSON files")->check(CLI::ExistingFile);
  gate_cmd->add_option("--entry", gate_entries, "Inline NAME=MAP pair, repeatable");

  // mine-negatives
  auto* mine_cmd = app.add_subcommand("mine-negatives", "Select hard negatives for retraining");
  Inputs mine_in;
  double mine_iou = 0.25;
  double mine_floor = 0.5;
  std::string mine_output;
  add_eval_inputs(mine_cmd, mine_in);
  mine_cmd->add_option("--iou-thr", mine_iou, "IoU that makes a prediction a true positive")->capture_default_str();
  mine_cmd->add_option("--fallback-floor", mine_floor, "Score floor for volumes without true positives")
      ->capture_default_str();
  mine_cmd->add_option("-o,--output", mine_output, "Output detections file (default stdout)");

  // normalize
  auto* norm_cmd = app.add_subcommand(
      "normalize", "Percentile intensity normalization of a .tvol (input assumed bias-corrected)");
  std::string norm_input;
  std::string norm_output;
  double norm_lo = 1.0;
  double norm_hi = 99.0;
  norm_cmd->add_option("input", norm_input, "Input .tvol")->required()->check(CLI::ExistingFile);
  norm_cmd->add_option("-o,--output", norm_output, "Output .tvol")->required();
  norm_cmd->add_option("--lo", norm_lo, "Lower percentile")->capture_default_str();
  norm_cmd->add_option("--hi", norm_hi, "Upper percentile")->capture_default_str();

  // windows
  auto* win_cmd = app.add_subcommand("windows", "Write one 3-slice window per slice as .tvol files");
  std::string win_input;
  std::string win_dir;
  win_cmd->add_option("input", win_input, "Input .tvol")->required()->check(CLI::ExistingFile);
  win_cmd->add_option("--out-dir", win_dir, "Output directory")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic annotated dataset with detections");
  std::uint64_t synth_seed = 0;
  std::string synth_config;
  std::string synth_dir;
  int synth_volumes = 0;
  auto* seed_opt = synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--config", synth_config, "SynthConfig JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--n-volumes", synth_volumes, "Override the number of volumes");
  synth_cmd->add_option("--out-dir", synth_dir, "Output directory")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Render report JSON files as a table, CSV or JSON");
  std::vector<std::string> report_inputs;
  ReportFormat report_format = ReportFormat::kTable;
  std::string report_output;
  report_cmd->add_option("reports", report_inputs, "Report JSON files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", report_format, "table, csv or json")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  report_cmd->add_option("-o,--output", report_output, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fuse_cmd) {
      const VolumeIndex index = slice_counts(parse_volume_inventory(fs::path(fuse_volumes)));
      std::vector<DetectionDataset> per_model;
      for (const auto& path : fuse_inputs) per_model.push_back(parse_detections(fs::path(path), index));
      fusion.model_count = static_cast<int>(per_model.size());
      fusion.validate();
      const DetectionDataset fused = fuse_volume(per_model, fusion, method, threads);
      std::ostringstream out;
      write_detections(out, fused.records);
      emit(fuse_output, out.str());
    } else if (*eval_cmd) {
      eval_cfg.threads = threads;
      eval_cfg.validate();
      const EvalInputs in = load_eval_inputs(eval_in);
      if (eval_name.empty()) eval_name = fs::path(eval_in.detections).stem().string();
      const EvalReport report = evaluate(in.dets, in.gt, eval_cfg, eval_name);
      const std::vector<EvalReport> one{report};
      emit(eval_output, eval_format == ReportFormat::kJson ? report_to_json(report)
                                                            : render_report(one, eval_format));
    } else if (*froc_cmd) {
      froc_cfg.threads = threads;
      froc_cfg.validate();
      const EvalInputs in = load_eval_inputs(froc_in);
      const FrocCurve curve = froc(in.dets, in.gt, froc_cfg);
      if (froc_output.empty() || froc_output == "-") {
        write_froc_csv(std::cout, curve);
      } else {
        froc_dump(curve, froc_output);
      }
    } else if (*gate_cmd) {
      std::vector<ModelScore> scores;
      for (const auto& path : gate_reports) {
        for (const auto& r : parse_reports_json(slurp(path), path)) scores.push_back({r.method_name, r.map_percent});
      }
      for (const auto& entry : gate_entries) {
        const auto eq = entry.rfind('=');
        if (eq == std::string::npos || eq == 0) {
          throw ValidationError("--entry", 0, entry, "expected NAME=MAP");
        }
        double value = 0.0;
        try {
          std::size_t used = 0;
          value = std::stod(entry.substr(eq + 1), &used);
          if (used != entry.size() - eq - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
          throw ValidationError("--entry", 0, entry, "mAP is not a number");
        }
        scores.push_back({entry.substr(0, eq), value});
      }
      for (const auto& name : ensemble_gate(scores, gate_threshold)) std::cout << name << '\n';
    } else if (*mine_cmd) {
      const EvalInputs in = load_eval_inputs(mine_in);
      std::vector<const std::string*> volumes;
      for (const auto& [id, lesions] : in.gt) volumes.push_back(&id);
      std::vector<MiningResult> mined(volumes.size());
      parallel_for(volumes.size(), threads, [&](std::size_t i) {
        mined[i] = select_hard_negatives(in.dets.at(*volumes[i]), in.gt.at(*volumes[i]), mine_iou, mine_floor);
      });
      std::ostringstream out;
      for (const auto& m : mined) write_detections(out, m.hard_negatives);
      emit(mine_output, out.str());
    } else if (*norm_cmd) {
      const Volume v = read_tvol(fs::path(norm_input));
      write_tvol(fs::path(norm_output), percentile_normalize(v, norm_lo, norm_hi));
    } else if (*win_cmd) {
      const Volume v = read_tvol(fs::path(win_input));
      fs::create_directories(win_dir);
      for (const auto& w : make_slice_windows(v)) {
        std::vector<double> voxels;
        voxels.reserve(3 * v.dims().slice_size());
        for (const auto& c : w.channels) voxels.insert(voxels.end(), c.begin(), c.end());
        char name[32];
        std::snprintf(name, sizeof(name), "window_%04d.tvol", w.center_index);
        write_tvol(fs::path(win_dir) / name, Volume({v.dims().nx, v.dims().ny, 3}, std::move(voxels)));
      }
    } else if (*synth_cmd) {
      SynthConfig cfg;
      if (!synth_config.empty()) {
        cfg = parse_synth_config(slurp(synth_config), synth_config);
      } else {
        cfg.detector_profiles = {{"model_a", 0.8, 2.0, {0.3, 1.0}, {0.05, 0.7}},
                                 {"model_b", 0.7, 4.0, {0.3, 1.0}, {0.05, 0.7}},
                                 {"model_c", 0.9, 8.0, {0.3, 1.0}, {0.05, 0.7}}};
      }
      if (*seed_opt) cfg.seed = synth_seed;
      if (synth_volumes > 0) cfg.n_volumes = synth_volumes;
      write_synth_output(synth_generate(cfg), synth_dir);
    } else if (*report_cmd) {
      std::vector<EvalReport> reports;
      for (const auto& path : report_inputs) {
        for (auto& r : parse_reports_json(slurp(path), path)) reports.push_back(std::move(r));
      }
      emit(report_output, render_report(reports, report_format));
    }
  } catch (const Error& e) {
    std::cerr << "detpost: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "detpost: unexpected error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
