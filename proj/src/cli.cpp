#include "cookar/cli.hpp"

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "cookar/dataset.hpp"
#include "cookar/error.hpp"
#include "cookar/eval.hpp"
#include "cookar/log.hpp"
#include "cookar/oracle.hpp"
#include "cookar/pipeline.hpp"
#include "cookar/replay.hpp"
#include "cookar/server.hpp"

namespace cookar::cli {

namespace {

namespace fs = std::filesystem;

/// Bad flag values or config keys; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SceneFlags {
  std::uint64_t seed = 1;
  int tools = 3;
  int width = 640;
  int height = 480;
  double jitter_px = 0.0;
  double confidence_floor = 1.0;
};

struct ServeFlags {
  std::string backend = "oracle";
  std::string host = "127.0.0.1";
  int port = 7465;
  std::string annotations;
  double threshold = kDefaultConfidenceThreshold;
  double inference_ms = 0.0;
  SceneFlags scene;
};

struct RunFlags {
  std::string source = "synthetic";
  std::size_t frames = 50;
  double duration_s = 0.0;
  SceneFlags scene;
  std::string dir;
  std::string annotations;
  std::string images;
  std::string backend = "inproc";
  std::string endpoint = "127.0.0.1:7465";
  int timeout_ms = 1000;
  std::string style = "cookar-study";
  bool stereo = false;
  double focal = 500.0;
  double baseline = 0.063;
  std::string mode = "serial";
  std::string drop_policy = "block";
  double threshold = kDefaultConfidenceThreshold;
  std::size_t inference_workers = 1;
  bool emulate_latency = false;
  std::array<double, kStageCount> delay_ms{};
  double replay_latency_ms = 0.0;
  std::string out;
};

struct EvalFlags {
  std::string pred;
  std::string gt;
  std::string out;
  std::string model = "model";
  std::size_t max_dets = kDefaultMaxDets;
  std::string render;
};

struct DatasetFlags {
  std::string annotations;
  std::string images;
  std::string out_dir;
  std::string out;
  int skip = kDefaultSkip;
  std::uint64_t seed = 0;
  std::int64_t id_offset = 0;
  AugmentRanges ranges;
  int width = kTargetWidth;
  int height = kTargetHeight;
  std::vector<double> ratios = {0.82, 0.12, 0.06};
};

struct Flags {
  std::string config;
  ServeFlags serve;
  RunFlags run;
  RunFlags profile;
  EvalFlags eval;
  DatasetFlags dataset;
};

// Per-stage latencies used by --emulate-latency, milliseconds.
constexpr std::array<double, kStageCount> kMeasuredStageMs = {0.0, 16.76, 15.95, 10.43, 3.39};

void add_scene_flags(CLI::App& app, SceneFlags& f) {
  app.add_option("--seed", f.seed, "Synthetic scene seed");
  app.add_option("--tools", f.tools, "Tools per synthetic scene")->check(CLI::Range(1, 6));
  app.add_option("--width", f.width, "Synthetic frame width")->check(CLI::PositiveNumber);
  app.add_option("--height", f.height, "Synthetic frame height")->check(CLI::PositiveNumber);
  app.add_option("--jitter-px", f.jitter_px, "Max offset of predicted polygons (oracle)")->check(CLI::NonNegativeNumber);
  app.add_option("--confidence-floor", f.confidence_floor, "Oracle confidences drawn in [floor, 1]")
      ->check(CLI::Range(0.0, 1.0));
}

SceneSpec scene_from(const SceneFlags& f) {
  SceneSpec s;
  s.seed = f.seed;
  s.tool_count = f.tools;
  s.width = f.width;
  s.height = f.height;
  s.jitter.translate_px = f.jitter_px;
  s.jitter.confidence_floor = f.confidence_floor;
  return s;
}

void add_run_flags(CLI::App& app, RunFlags& f, bool profile) {
  app.add_option("--source", f.source, "Frame source")->check(CLI::IsMember({"synthetic", "dir", "replay"}));
  app.add_option("--frames", f.frames, "Synthetic frame count");
  app.add_option("--duration", f.duration_s, "Stop capturing after this many seconds (0 = no limit)");
  add_scene_flags(app, f.scene);
  app.add_option("--dir", f.dir, "Image directory for --source dir (frame_id = position in name order)");
  app.add_option("--annotations", f.annotations, "Annotation JSON (replay source, or in-process replay backend)");
  app.add_option("--images", f.images, "Image directory for --source replay");
  app.add_option("--backend", f.backend, "Segmentation backend")->check(CLI::IsMember({"inproc", "remote"}));
  app.add_option("--endpoint", f.endpoint, "Remote backend HOST:PORT");
  app.add_option("--timeout-ms", f.timeout_ms, "Per-frame RESULT timeout (remote)")->check(CLI::PositiveNumber);
  app.add_option("--style", f.style,
                 "Style preset (cookar-study: solid #3BE8B0 grabbable, solid #FC626A hazardous; "
                 "preferred: solid grabbable, outlined hazardous) or a style JSON file");
  app.add_flag("--stereo", f.stereo, "Also render the right view");
  app.add_option("--focal", f.focal, "Focal length in pixels")->check(CLI::PositiveNumber);
  app.add_option("--baseline", f.baseline, "Stereo baseline in metres")->check(CLI::PositiveNumber);
  app.add_option("--mode", f.mode, "Run mode")->check(CLI::IsMember({"serial", "pipelined"}));
  app.add_option("--drop-policy", f.drop_policy, "Late result policy (pipelined)")
      ->check(CLI::IsMember({"block", "drop_late"}));
  app.add_option("--threshold", f.threshold, "Confidence threshold (in-process backend)")->check(CLI::Range(0.0, 1.0));
  app.add_option("--inference-workers", f.inference_workers, "Concurrent inference workers (pipelined, in-process)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--emulate-latency", f.emulate_latency,
               "Hold stages for 0 / 16.76 / 15.95 / 10.43 / 3.39 ms (capture, stream_to_server, inference, "
               "stream_back, render); explicit --delay-* flags override");
  const char* names[] = {"--delay-capture", "--delay-stream", "--delay-inference", "--delay-back", "--delay-render"};
  for (std::size_t i = 0; i < kStageCount; ++i)
    app.add_option(names[i], f.delay_ms[i], "Minimum stage time in ms")->check(CLI::NonNegativeNumber);
  app.add_option("--replay-latency", f.replay_latency_ms, "Emulated replay inference time in ms (in-process)")
      ->check(CLI::NonNegativeNumber);
  if (profile)
    app.add_option("--out", f.out, "Write the latency report JSON here");
  else
    app.add_option("--out", f.out, "Output directory for frame PNGs and report.json")->required();
}

RunConfig run_config_from(const RunFlags& f, const CLI::App& app) {
  RunConfig c;
  SceneSpec scene = scene_from(f.scene);
  scene.rig = {f.focal, f.baseline};
  if (f.source == "synthetic") {
    c.source = SyntheticSourceConfig{scene, f.frames};
  } else if (f.source == "dir") {
    if (f.dir.empty()) throw UsageError("--source dir needs --dir");
    DirectorySourceConfig d{f.dir, std::nullopt};
    if (!f.annotations.empty()) d.annotations = f.annotations;
    c.source = d;
  } else {
    if (f.annotations.empty() || f.images.empty()) throw UsageError("--source replay needs --annotations and --images");
    c.source = ReplaySourceConfig{f.annotations, f.images};
  }
  c.backend = f.backend == "remote" ? BackendKind::remote : BackendKind::inproc;
  try {
    c.endpoint = Endpoint::parse(f.endpoint);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  c.remote.timeout = std::chrono::milliseconds(f.timeout_ms);
  if (f.replay_latency_ms > 0) c.replay_latency = std::chrono::microseconds(std::llround(f.replay_latency_ms * 1000));

  auto& p = c.pipeline;
  p.style = resolve_style(f.style);
  p.stereo = {f.stereo, f.focal, f.baseline};
  p.mode = f.mode == "pipelined" ? RunMode::pipelined : RunMode::serial;
  p.drop_policy = f.drop_policy == "drop_late" ? DropPolicy::drop_late : DropPolicy::block;
  p.confidence_threshold = f.threshold;
  p.inference_workers = f.inference_workers;
  if (f.duration_s > 0) p.duration = std::chrono::milliseconds(std::llround(f.duration_s * 1000));
  const char* names[] = {"--delay-capture", "--delay-stream", "--delay-inference", "--delay-back", "--delay-render"};
  for (std::size_t i = 0; i < kStageCount; ++i) {
    double ms = f.emulate_latency ? kMeasuredStageMs[i] : 0.0;
    if (app.count(names[i]) > 0) ms = f.delay_ms[i];
    p.delays[i] = std::chrono::microseconds(std::llround(ms * 1000));
  }
  return c;
}

int cmd_run(const RunFlags& f, const CLI::App& app, bool profile) {
  const RunConfig config = run_config_from(f, app);
  RunResult result;
  if (profile) {
    NullSink sink;
    result = run(config, sink);
    if (!f.out.empty()) write_json_file(report_to_json(result.report), f.out);
  } else {
    PngDirectorySink sink(f.out);
    result = run(config, sink);
    write_json_file(report_to_json(result.report), fs::path(f.out) / "report.json");
  }
  std::cout << render_report(result.report);
  if (result.error) {
    std::cerr << "run aborted: " << *result.error << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

int cmd_serve(const ServeFlags& f) {
  std::shared_ptr<SegmentationProvider> provider;
  const auto delay = std::chrono::microseconds(std::llround(f.inference_ms * 1000));
  if (f.backend == "oracle") {
    provider = std::make_shared<OracleBackend>(scene_from(f.scene));
    if (delay.count() > 0) provider = std::make_shared<DelayedProvider>(provider, delay);
  } else {
    if (f.annotations.empty()) throw UsageError("--backend replay needs --annotations");
    std::optional<std::chrono::microseconds> latency;
    if (delay.count() > 0) latency = delay;
    provider = std::make_shared<ReplayBackend>(load_annotations(f.annotations), latency);
  }
  ServeConfig config;
  config.endpoint = {f.host, static_cast<std::uint16_t>(f.port)};
  config.confidence_threshold = f.threshold;
  SegmentationServer server(provider, config);
  const auto port = server.start();
  std::cout << port << std::endl;
  log().info("serving {} backend on {}:{}", f.backend, f.host, port);

  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  return kExitOk;
}

int cmd_eval(const EvalFlags& f) {
  if (!f.render.empty()) {
    if (!f.pred.empty() || !f.gt.empty()) throw UsageError("--render cannot be combined with --pred/--gt");
    const auto rows = table_rows_from_json(read_json_file(f.render));
    std::cout << render_table(rows);
    return kExitOk;
  }
  if (f.pred.empty() || f.gt.empty()) throw UsageError("eval needs --pred and --gt (or --render)");
  const auto report = evaluate(load_annotations(f.pred), load_annotations(f.gt), f.max_dets);
  const auto doc = report_to_json(report, f.model);
  if (!f.out.empty()) write_json_file(doc, f.out);
  const TableRow row{f.model, report.map, report.ap50, report.ap75};
  std::cout << render_table(std::span(&row, 1));
  return kExitOk;
}

int cmd_dataset(const std::string& op, const DatasetFlags& f) {
  const AnnotationSet set = load_annotations(f.annotations);
  if (op == "filter") {
    const auto kept = filter_annotated(set, f.skip);
    if (!f.out.empty()) write_json_file({{"frames", kept}, {"skip", f.skip}}, f.out);
    std::cout << kept.size() << " key frames of " << set.images.size() << "\n";
    return kExitOk;
  }
  if (op == "split") {
    std::vector<std::int64_t> ids;
    for (const auto& image : set.images) ids.push_back(image.id);
    if (f.ratios.size() != 3) throw UsageError("--ratios takes three values");
    SplitSpec spec{{f.ratios[0], f.ratios[1], f.ratios[2]}, f.seed};
    const auto result = split(ids, spec);
    if (!f.out.empty()) write_json_file(split_manifest(result, f.seed), f.out);
    std::cout << "train " << result.train.size() << ", val " << result.val.size() << ", test " << result.test.size()
              << "\n";
    return kExitOk;
  }
  if (f.images.empty() || f.out_dir.empty() || f.out.empty())
    throw UsageError("dataset " + op + " needs --images, --out-dir and --out");
  const AnnotationSet result = op == "augment"
                                   ? augment_dataset(set, f.images, f.out_dir, f.ranges, f.seed, f.id_offset)
                                   : resize_dataset(set, f.images, f.out_dir, f.width, f.height);
  save_annotations(result, f.out);
  std::cout << result.images.size() << " images, " << result.annotations.size() << " annotations\n";
  return kExitOk;
}

struct Commands {
  CLI::App app{"Affordance overlay pipeline: serve segmentation, run and profile the overlay pipeline, "
               "evaluate predictions, curate datasets.",
               "cookar"};
  CLI::App* serve = nullptr;
  CLI::App* run = nullptr;
  CLI::App* profile = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* dataset = nullptr;
  std::map<std::string, CLI::App*> dataset_ops;
};

void build(Commands& c, Flags& f) {
  auto& app = c.app;
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "cookar 1.0");
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON file of defaults; keys are flag names without dashes");
  };

  c.serve = app.add_subcommand("serve", "Serve a segmentation backend over TCP (prints the bound port)");
  add_config(c.serve);
  c.serve->add_option("--backend", f.serve.backend, "Backend")->check(CLI::IsMember({"oracle", "replay"}));
  c.serve->add_option("--host", f.serve.host, "Bind address");
  c.serve->add_option("--port", f.serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  c.serve->add_option("--annotations", f.serve.annotations, "Annotation JSON for the replay backend");
  c.serve->add_option("--threshold", f.serve.threshold, "Drop instances below this confidence")
      ->check(CLI::Range(0.0, 1.0));
  c.serve->add_option("--inference-ms", f.serve.inference_ms, "Emulated inference time in ms")
      ->check(CLI::NonNegativeNumber);
  add_scene_flags(*c.serve, f.serve.scene);

  c.run = app.add_subcommand("run", "Run the overlay pipeline; writes frame PNGs and report.json");
  add_config(c.run);
  add_run_flags(*c.run, f.run, false);

  c.profile = app.add_subcommand("profile", "Run the pipeline and emit only the latency report");
  add_config(c.profile);
  add_run_flags(*c.profile, f.profile, true);

  c.eval = app.add_subcommand("eval",
                              "Mask AP of predictions against ground truth: IoU thresholds 0.50:0.05:0.95, "
                              "101-point interpolation, greedy matching");
  add_config(c.eval);
  c.eval->add_option("--pred", f.eval.pred, "Prediction annotation JSON (every annotation needs a score)");
  c.eval->add_option("--gt", f.eval.gt, "Ground-truth annotation JSON");
  c.eval->add_option("--out", f.eval.out, "Write the metrics report JSON here");
  c.eval->add_option("--model", f.eval.model, "Model name for the table row");
  c.eval->add_option("--max-dets", f.eval.max_dets, "Predictions kept per image")->check(CLI::PositiveNumber);
  c.eval->add_option("--render", f.eval.render, "Only render a precomputed report JSON as a table");

  c.dataset = app.add_subcommand("dataset", "Dataset curation");
  c.dataset->require_subcommand(1);
  auto& d = f.dataset;
  auto common = [&](CLI::App* sub) {
    add_config(sub);
    sub->add_option("--annotations", d.annotations, "Annotation JSON")->required();
  };
  auto* filter = c.dataset->add_subcommand("filter", "Key frames: images with annotations, then skip N frames");
  common(filter);
  filter->add_option("--skip", d.skip, "Frames skipped after each key frame")->check(CLI::NonNegativeNumber);
  filter->add_option("--out", d.out, "Write {\"frames\": [...]} here");

  auto* augment = c.dataset->add_subcommand(
      "augment",
      "One augmented copy per image (crop-zoom, rotation, brightness, blur, salt-and-pepper noise). "
      "Doubling a dataset: run with two seeds and distinct --id-offset values, then merge with the originals.");
  common(augment);
  augment->add_option("--images", d.images, "Source image directory");
  augment->add_option("--out-dir", d.out_dir, "Output image directory");
  augment->add_option("--out", d.out, "Output annotation JSON");
  augment->add_option("--seed", d.seed, "Augmentation seed (per image: seed xor image id)");
  augment->add_option("--id-offset", d.id_offset, "Added to image and annotation ids");
  augment->add_option("--max-zoom", d.ranges.max_zoom, "Crop zoom drawn in [0, max]");
  augment->add_option("--max-rotation", d.ranges.max_rotation_deg, "Rotation in degrees drawn in [-max, max]");
  augment->add_option("--max-brightness", d.ranges.max_brightness, "Brightness change drawn in [-max, max]");
  augment->add_option("--max-blur", d.ranges.max_blur_sigma, "Gaussian sigma in px drawn in [0, max]");
  augment->add_option("--max-noise", d.ranges.max_noise_fraction, "Noisy pixel fraction drawn in [0, max]");

  auto* resize = c.dataset->add_subcommand("resize", "Stretch images and annotations to a fixed resolution");
  common(resize);
  resize->add_option("--images", d.images, "Source image directory");
  resize->add_option("--out-dir", d.out_dir, "Output image directory");
  resize->add_option("--out", d.out, "Output annotation JSON");
  resize->add_option("--width", d.width, "Target width")->check(CLI::PositiveNumber);
  resize->add_option("--height", d.height, "Target height")->check(CLI::PositiveNumber);

  auto* split_cmd = c.dataset->add_subcommand("split", "Seeded train/val/test split of the image ids (split before augmenting)");
  common(split_cmd);
  split_cmd->add_option("--seed", d.seed, "Shuffle seed");
  split_cmd->add_option("--ratios", d.ratios, "Train, val, test fractions")->expected(3)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  split_cmd->add_option("--out", d.out, "Write the split manifest JSON here");

  c.dataset_ops = {{"filter", filter}, {"augment", augment}, {"resize", resize}, {"split", split_cmd}};
}

/// Turns a JSON config object into flags placed before the command-line
/// ones, so explicit flags win.
std::vector<std::string> config_args(const fs::path& path, const CLI::App& sub) {
  nlohmann::json doc;
  try {
    doc = read_json_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (key == "config") throw UsageError("config files cannot nest");
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (!opt) throw UsageError("unknown config key: " + key);
    if (value.is_boolean()) {
      if (opt->get_expected_min() != 0) throw UsageError("config key " + key + " is not a switch");
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      out.push_back(flag);
      for (const auto& v : value) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(value.dump());
    } else {
      throw UsageError("unsupported value for config key " + key);
    }
  }
  return out;
}

int parse_and_run(std::vector<std::string> args, bool config_applied) {
  Commands c;
  Flags f;
  build(c, f);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    c.app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = c.app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Path of subcommand names leading to the selected leaf.
  std::vector<std::string> path;
  const CLI::App* leaf = &c.app;
  for (;;) {
    const auto subs = leaf->get_subcommands();
    if (subs.empty()) break;
    leaf = subs.front();
    path.push_back(leaf->get_name());
  }

  if (!f.config.empty() && !config_applied) {
    auto extra = config_args(f.config, *leaf);
    std::vector<std::string> merged;
    // Subcommand names come first in args, in order.
    std::size_t i = 0;
    for (; i < args.size() && i < path.size() && args[i] == path[i]; ++i) merged.push_back(args[i]);
    merged.insert(merged.end(), extra.begin(), extra.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(i), args.end());
    return parse_and_run(std::move(merged), true);
  }

  try {
    if (leaf == c.serve) return cmd_serve(f.serve);
    if (leaf == c.run) return cmd_run(f.run, *c.run, false);
    if (leaf == c.profile) return cmd_run(f.profile, *c.profile, true);
    if (leaf == c.eval) return cmd_eval(f.eval);
    for (const auto& [name, sub] : c.dataset_ops)
      if (leaf == sub) return cmd_dataset(name, f.dataset);
    std::cerr << c.app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  try {
    return parse_and_run(args, false);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace cookar::cli
