// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "json.hpp"
#include "wsloc/bootstrap.hpp"
#include "wsloc/error.hpp"
#include "wsloc/eval.hpp"
#include "wsloc/filter.hpp"
#include "wsloc/io.hpp"
#include "wsloc/parallel.hpp"
#include "wsloc/rounds.hpp"
#include "wsloc/sim.hpp"

namespace wsloc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kLogLevels = {"trace", "debug", "info",
                                             "warn",  "error", "off"};

struct Globals {
  std::uint64_t seed = 0;
  std::string workdir = ".";
  int jobs = 0;
  std::string log_level = "info";
};

struct Context {
  Globals globals;
  std::ostream* out;
  std::shared_ptr<spdlog::logger> log;

  int jobs() const { return resolve_jobs(globals.jobs); }
};

struct CorpusFlags {
  std::string detections;
  std::string captions;
  std::string classes;
  int image_width = 1280;
  int image_height = 720;

  ImageSize image() const { return {image_width, image_height}; }
};

void add_image_flags(CLI::App* app, CorpusFlags& f) {
  app->add_option("--image-width", f.image_width, "Image width in pixels")
      ->check(CLI::PositiveNumber);
  app->add_option("--image-height", f.image_height, "Image height in pixels")
      ->check(CLI::PositiveNumber);
}

void add_corpus_flags(CLI::App* app, CorpusFlags& f) {
  app->add_option("--detections", f.detections, "Part detections JSONL")
      ->required();
  app->add_option("--captions", f.captions, "Clip captions CSV")->required();
  app->add_option("--classes", f.classes, "Class list, one name per line")
      ->required();
  add_image_flags(app, f);
}

Corpus load_corpus(const CorpusFlags& f) {
  Corpus c;
  c.registry = read_class_list(f.classes);
  c.image_size = f.image();
  c.captions = read_captions(f.captions, c.registry);
  c.frames = read_detections(f.detections, c.registry);
  for (FrameDetections& frame : c.frames) frame.tools.clear();
  return c;
}

// Flags that may override a value loaded from a plan file.
struct FilterFlags {
  double tau = 0.8;
  std::string overlap_metric = "iou";
  std::string match_mode = "capped";
  double min_tool_confidence = 0.25;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* metric_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* conf_opt = nullptr;

  void apply(FilterConfig& cfg) const {
    if (tau_opt->count()) cfg.tau = tau;
    if (metric_opt->count()) cfg.overlap_metric = *parse_overlap_metric(overlap_metric);
    if (mode_opt->count()) cfg.match_mode = *parse_match_mode(match_mode);
    if (conf_opt->count()) cfg.min_tool_confidence = min_tool_confidence;
    cfg.validate();
  }
};

void add_filter_flags(CLI::App* app, FilterFlags& f) {
  f.tau_opt = app->add_option("--tau", f.tau, "Overlap threshold, in (0, 1)")
                  ->check(CLI::Range(0.0, 1.0));
  f.metric_opt = app->add_option("--overlap-metric", f.overlap_metric,
                                 "iou or iomin")
                     ->check(CLI::IsMember({"iou", "iomin"}));
  f.mode_opt = app->add_option("--match-mode", f.match_mode, "capped or literal")
                   ->check(CLI::IsMember({"capped", "literal"}));
  f.conf_opt = app->add_option("--min-tool-confidence", f.min_tool_confidence,
                               "Tool boxes below this are dropped")
                   ->check(CLI::Range(0.0, 1.0));
}

struct BootstrapFlags {
  double min_part_confidence = 0.25;
  std::string anchor_rule = "clevis_or_special_tip";
  int required_tool_count = 3;
  CLI::Option* conf_opt = nullptr;
  CLI::Option* rule_opt = nullptr;
  CLI::Option* count_opt = nullptr;

  void apply(BootstrapConfig& cfg) const {
    if (conf_opt->count()) cfg.min_part_confidence = min_part_confidence;
    if (rule_opt->count()) cfg.anchor_rule = *parse_anchor_rule(anchor_rule);
    if (count_opt->count()) cfg.required_tool_count = required_tool_count;
    cfg.validate();
  }
};

void add_bootstrap_flags(CLI::App* app, BootstrapFlags& f) {
  f.conf_opt = app->add_option("--min-part-confidence", f.min_part_confidence,
                               "Part boxes below this are ignored")
                   ->check(CLI::Range(0.0, 1.0));
  f.rule_opt = app->add_option("--anchor-rule", f.anchor_rule,
                               "clevis_or_special_tip or clevis_only")
                   ->check(CLI::IsMember({"clevis_or_special_tip", "clevis_only"}));
  f.count_opt = app->add_option("--required-tool-count", f.required_tool_count,
                                "Caption length a frame must have")
                    ->check(CLI::PositiveNumber);
}

json globals_json(const Context& ctx) {
  return {{"seed", ctx.globals.seed},
          {"workdir", ctx.globals.workdir},
          {"jobs", ctx.jobs()},
          {"log_level", ctx.globals.log_level}};
}

void write_effective_config(const Context& ctx, const std::string& command,
                            json options) {
  json j = globals_json(ctx);
  j["command"] = command;
  j["options"] = std::move(options);
  write_file_atomic(fs::path(ctx.globals.workdir) / "effective_config.json",
                    j.dump(2) + "\n");
}

json corpus_json(const CorpusFlags& f) {
  return {{"detections", f.detections},
          {"captions", f.captions},
          {"classes", f.classes},
          {"image_width", f.image_width},
          {"image_height", f.image_height}};
}

json counts_json(const ClassRegistry& registry,
                 const std::vector<std::int64_t>& counts) {
  json j = json::object();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    j[registry.at(static_cast<int>(i)).name] = counts[i];
  }
  return j;
}

// ---------------------------------------------------------------------------

struct BootstrapCommand {
  CorpusFlags corpus;
  BootstrapFlags flags;
  std::string out;
  bool json_output = false;

  void attach(CLI::App* app) {
    add_corpus_flags(app, corpus);
    add_bootstrap_flags(app, flags);
    app->add_option("--out", out, "Dataset directory (default <workdir>/round_0)");
    app->add_flag("--json", json_output, "Print the manifest to standard output");
  }

  int run(Context& ctx) {
    RoundPlan plan;
    plan.seed = ctx.globals.seed;
    plan.workdir = ctx.globals.workdir;
    flags.apply(plan.bootstrap_cfg);
    const fs::path out_dir = out.empty() ? round_dir(plan.workdir, 0) : fs::path(out);
    write_effective_config(ctx, "bootstrap",
                           {{"corpus", corpus_json(corpus)},
                            {"bootstrap", to_json(plan.bootstrap_cfg)},
                            {"out", out_dir.string()}});
    const Corpus c = load_corpus(corpus);
    RunOptions options;
    options.jobs = ctx.jobs();
    const RoundManifest m = run_bootstrap_round(c, plan, corpus_digest(c), nullptr,
                                                options, out_dir);
    ctx.log->info("bootstrap: accepted {}/{} frames", m.frames_accepted,
                  m.frames_seen);
    for (const auto& [reason, n] : m.rejections) {
      ctx.log->info("  skipped ({}): {}", reason, n);
    }
    ctx.log->info("dataset written to {}", out_dir.string());
    if (json_output) *ctx.out << to_json(m).dump(2) << "\n";
    return kExitOk;
  }
};

struct RoundCommand {
  CorpusFlags corpus;
  FilterFlags filter;
  BootstrapFlags boot;
  std::string plan_path;
  std::string gt;
  std::string detector = "surrogate";
  int rounds = 4;
  bool json_output = false;
  CLI::Option* rounds_opt = nullptr;
  CLI::Option* detector_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workdir_opt = nullptr;

  void attach(CLI::App* app) {
    add_corpus_flags(app, corpus);
    add_filter_flags(app, filter);
    add_bootstrap_flags(app, boot);
    app->add_option("--plan", plan_path, "JSON plan file")
        ->check(CLI::ExistingFile);
    app->add_option("--gt", gt, "Ground-truth JSONL (surrogate detector, evaluation)");
    rounds_opt = app->add_option("--rounds", rounds, "Number of filter rounds")
                     ->check(CLI::NonNegativeNumber);
    detector_opt = app->add_option("--detector", detector, "surrogate or file")
                       ->check(CLI::IsMember({"surrogate", "file"}));
    app->add_flag("--json", json_output,
                  "Print all manifests as a JSON array to standard output");
  }

  int run(Context& ctx) {
    RoundPlan plan;
    json plan_json = json::object();
    if (!plan_path.empty()) {
      try {
        plan_json = json::parse(read_file(plan_path));
      } catch (const json::parse_error& e) {
        throw ConfigError("plan '" + plan_path + "' is not valid JSON: " + e.what());
      }
      if (!plan_json.is_object()) throw ConfigError("plan must be a JSON object");
      if (!plan_json.contains("workdir")) plan_json["workdir"] = ctx.globals.workdir;
      plan = round_plan_from_json(plan_json);
    } else {
      plan.workdir = ctx.globals.workdir;
    }
    if (plan_path.empty() || !plan_json.contains("seed") || seed_opt->count()) {
      plan.seed = ctx.globals.seed;
    }
    if (workdir_opt->count()) plan.workdir = ctx.globals.workdir;
    if (rounds_opt->count()) plan.rounds = rounds;
    if (detector_opt->count()) plan.detector = detector;
    filter.apply(plan.filter_cfg);
    boot.apply(plan.bootstrap_cfg);
    plan.validate();

    write_effective_config(ctx, "round",
                           {{"corpus", corpus_json(corpus)},
                            {"plan", to_json(plan)},
                            {"gt", gt}});
    const Corpus c = load_corpus(corpus);
    std::optional<std::vector<GroundTruthFrame>> truth;
    if (!gt.empty()) truth = read_ground_truth(gt, c.registry);
    const auto source = make_detector_source(plan, c, truth ? &*truth : nullptr);

    RunOptions options;
    options.jobs = ctx.jobs();
    options.ground_truth = truth ? &*truth : nullptr;
    options.on_round = [&](const RoundManifest& m, bool reused) {
      std::string quality;
      if (m.evaluation && m.evaluation->label_precision) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), ", label precision %.4f",
                      *m.evaluation->label_precision);
        quality = buf;
      }
      ctx.log->info("round {}: accepted {}/{} frames{} [{}]", m.round,
                    m.frames_accepted, m.frames_seen, quality,
                    reused ? "reused" : "computed");
    };
    const auto manifests = run_plan(plan, c, *source, options);
    if (json_output) {
      json arr = json::array();
      for (const RoundManifest& m : manifests) arr.push_back(to_json(m));
      *ctx.out << arr.dump(2) << "\n";
    }
    return kExitOk;
  }
};

struct SimulateCommand {
  std::int64_t frames = 0;
  std::string out;
  std::string classes;
  int image_width = 1280;
  int image_height = 720;
  std::vector<double> tools_weights{0.0, 0.0, 1.0};
  double crossing_prob = 0.2;
  double special_fraction = 0.4;
  int frames_per_clip = 25;
  double part_jitter = 3.0;
  double miss_rate = 0.03;
  double fp_rate = 0.3;

  void attach(CLI::App* app) {
    app->add_option("--frames", frames, "Number of frames")
        ->required()
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--classes", classes, "Class list (default: built-in list)");
    app->add_option("--image-width", image_width)->check(CLI::PositiveNumber);
    app->add_option("--image-height", image_height)->check(CLI::PositiveNumber);
    app->add_option("--tools-weights", tools_weights,
                    "Relative weights of 1, 2 and 3 instruments per clip")
        ->expected(3);
    app->add_option("--crossing-prob", crossing_prob)->check(CLI::Range(0.0, 1.0));
    app->add_option("--special-fraction", special_fraction)
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--frames-per-clip", frames_per_clip)
        ->check(CLI::PositiveNumber);
    app->add_option("--part-jitter", part_jitter, "Part box jitter sigma, pixels")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--miss-rate", miss_rate)->check(CLI::Range(0.0, 1.0));
    app->add_option("--fp-rate", fp_rate, "False positive parts per frame")
        ->check(CLI::NonNegativeNumber);
  }

  int run(Context& ctx) {
    SceneSpec spec;
    spec.image_size = {image_width, image_height};
    for (std::size_t i = 0; i < 3; ++i) spec.tools_per_frame[i] = tools_weights[i];
    spec.crossing_prob = crossing_prob;
    spec.special_fraction = special_fraction;
    spec.frames_per_clip = frames_per_clip;
    spec.seed = ctx.globals.seed;
    spec.validate();
    DetectorNoise noise;
    noise.box_jitter_sigma = part_jitter;
    noise.miss_rate = miss_rate;
    noise.false_positive_rate = fp_rate;

    write_effective_config(
        ctx, "simulate",
        {{"frames", frames},
         {"out", out},
         {"classes", classes},
         {"image_width", image_width},
         {"image_height", image_height},
         {"tools_weights", tools_weights},
         {"crossing_prob", crossing_prob},
         {"special_fraction", special_fraction},
         {"frames_per_clip", frames_per_clip},
         {"part_jitter", part_jitter},
         {"miss_rate", miss_rate},
         {"fp_rate", fp_rate}});
    const ClassRegistry registry =
        classes.empty() ? default_sim_registry() : read_class_list(classes);
    const SimCorpus corpus = generate_corpus(spec, frames, registry, ctx.jobs());
    const auto detections = emulate_corpus(corpus, noise, ctx.jobs());

    const fs::path dir(out);
    write_class_list(dir / "classes.txt", registry);
    write_captions(dir / "captions.csv", corpus.captions, registry);
    write_detections(dir / "detections.jsonl", detections, registry);
    write_ground_truth(dir / "ground_truth.jsonl", corpus.frames, registry);
    std::int64_t crossed = 0;
    for (const auto& f : corpus.frames) crossed += f.crossed ? 1 : 0;
    ctx.log->info("simulated {} frames in {} clips ({} crossed) into {}", frames,
                  corpus.captions.size(), crossed, dir.string());
    return kExitOk;
  }
};

struct EvalCommand {
  std::string pred;
  std::string gt;
  std::string classes;
  double label_iou = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--pred", pred, "Predictions JSONL (tool boxes)")->required();
    app->add_option("--gt", gt, "Ground-truth JSONL")->required();
    app->add_option("--classes", classes,
                    "Class list (default: classes named in the files)");
    app->add_option("--label-iou", label_iou,
                    "IOU a prediction must exceed to count as a correct label")
        ->check(CLI::Range(0.0, 1.0));
  }

  int run(Context& ctx) {
    write_effective_config(ctx, "eval",
                           {{"pred", pred},
                            {"gt", gt},
                            {"classes", classes},
                            {"label_iou", label_iou}});
    ClassRegistry registry;
    if (!classes.empty()) {
      registry = read_class_list(classes);
    } else {
      std::vector<std::string> names = scan_tool_class_names(gt);
      std::vector<std::string> normalized;
      for (const auto& n : names) normalized.push_back(normalize_class_name(n));
      for (const auto& n : scan_tool_class_names(pred)) {
        const std::string key = normalize_class_name(n);
        if (std::find(normalized.begin(), normalized.end(), key) == normalized.end()) {
          normalized.push_back(key);
          names.push_back(n);
        }
      }
      if (names.empty()) throw EvalError("ground truth is empty: nothing to evaluate");
      registry = ClassRegistry::build(names);
    }
    const auto gt_frames = eval_frames_from_tools(read_detections(gt, registry));
    const auto pred_detections = read_detections(pred, registry);
    const auto pred_frames = eval_frames_from_tools(pred_detections);

    const auto thresholds = coco_iou_thresholds();
    const MapReport report =
        evaluate_map(pred_frames, gt_frames, thresholds, ctx.jobs());

    std::vector<PseudoLabelRecord> records;
    for (const FrameDetections& f : pred_detections) {
      records.push_back({f.clip_id, f.frame_index, f.tools, {}});
    }
    const LabelQuality q =
        label_quality(records, gt_frames, registry.size(), label_iou);

    json per_class = json::object();
    for (const auto& [id, ap] : report.per_class) per_class[registry.at(id).name] = ap;
    json per_threshold = json::object();
    for (const auto& [t, v] : report.per_threshold) {
      char key[16];
      std::snprintf(key, sizeof(key), "%.2f", t);
      per_threshold[key] = v;
    }
    json result = {
        {"map", report.map},
        {"per_class", per_class},
        {"per_threshold", per_threshold},
        {"precision", q.precision ? json(*q.precision) : json(nullptr)},
        {"recall", q.recall},
        {"uncovered_frames", q.uncovered_frames},
        {"ap_interpolation", "101-point"},
        {"label_match_iou", label_iou},
    };
    if (q.uncovered_frames > 0) {
      ctx.log->warn("{} predicted frames have no ground truth", q.uncovered_frames);
    }
    *ctx.out << result.dump(2) << "\n";
    return kExitOk;
  }
};

struct FilterCommand {
  CorpusFlags corpus;
  FilterFlags flags;
  std::string detections;
  std::string classes;
  std::string out;
  int round = 1;
  bool json_output = false;

  void attach(CLI::App* app) {
    app->add_option("--detections", detections, "Detections JSONL with tool boxes")
        ->required();
    app->add_option("--classes", classes, "Class list")->required();
    add_image_flags(app, corpus);
    add_filter_flags(app, flags);
    app->add_option("--round", round, "Round number stamped on records")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "Write the accepted frames as a dataset here");
    app->add_flag("--json", json_output, "Print statistics to standard output");
  }

  int run(Context& ctx) {
    FilterConfig cfg;
    flags.apply(cfg);
    write_effective_config(ctx, "filter",
                           {{"detections", detections},
                            {"classes", classes},
                            {"image_width", corpus.image_width},
                            {"image_height", corpus.image_height},
                            {"filter", to_json(cfg)},
                            {"round", round},
                            {"out", out}});
    const ClassRegistry registry = read_class_list(classes);
    const auto frames = read_detections(detections, registry);
    const FilterResult result = filter_corpus(frames, registry, cfg, round, ctx.jobs());
    ctx.log->info("filter: accepted {}/{} frames", result.stats.frames_accepted,
                  result.stats.frames_seen);
    json rejections = json::object();
    for (RejectReason r : kAllRejectReasons) {
      rejections[std::string(to_string(r))] = result.stats.rejected(r);
      ctx.log->info("  rejected ({}): {}", to_string(r), result.stats.rejected(r));
    }
    if (!out.empty()) {
      const auto summary =
          write_pseudo_dataset(result.records, corpus.image(), out, registry);
      ctx.log->info("wrote {} label files to {}", summary.files, out);
    }
    if (json_output) {
      json j = {{"frames_seen", result.stats.frames_seen},
                {"frames_accepted", result.stats.frames_accepted},
                {"rejections", rejections},
                {"per_class_counts",
                 counts_json(registry, result.stats.per_class_counts)},
                {"filter", to_json(cfg)}};
      *ctx.out << j.dump(2) << "\n";
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Weakly supervised instrument localization pipeline", "wsloc"};
  app.require_subcommand(1);
  Context ctx;
  ctx.out = &out;
  auto* seed_opt = app.add_option("--seed", ctx.globals.seed, "Random seed");
  auto* workdir_opt =
      app.add_option("--workdir", ctx.globals.workdir, "Working directory");
  app.add_option("--jobs", ctx.globals.jobs, "Worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", ctx.globals.log_level, "Log verbosity")
      ->check(CLI::IsMember(kLogLevels));

  BootstrapCommand bootstrap;
  RoundCommand round;
  SimulateCommand simulate;
  EvalCommand eval;
  FilterCommand filter;
  std::function<int(Context&)> action;
  auto add = [&](const char* name, const char* desc, auto& command) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    command.attach(sub);
    sub->callback([&] { action = [&](Context& c) { return command.run(c); }; });
  };
  add("bootstrap", "Round-0 pseudo-labels from captions and part detections",
      bootstrap);
  add("round", "Bootstrap plus multi-round filtering over a workdir", round);
  add("simulate", "Generate a synthetic corpus with ground truth", simulate);
  add("eval", "Score tool detections against ground truth", eval);
  add("filter", "One filtering pass over a detections file", filter);
  round.seed_opt = seed_opt;
  round.workdir_opt = workdir_opt;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  ctx.log = std::make_shared<spdlog::logger>("wsloc", sink);
  ctx.log->set_pattern("%l: %v");
  ctx.log->set_level(spdlog::level::from_str(ctx.globals.log_level));

  try {
    return action(ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PipelineStateError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipelineState;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace wsloc::cli
