// quadflow: batch CLI for quadratic video frame interpolation.
//
// Subcommands
//   interpolate  four input frames -> synthesized frames at chosen times
//   synth        render an oracle scene: quartet, targets, ground-truth flows
//   metrics      PSNR / SSIM / IE (optionally ASFP) between two images
//   flow         estimate | reverse | filter as standalone stages
//   eval         full oracle comparison of motion models on one scene
//
// Exit codes: 0 success, 2 usage error, 1 runtime error (stage-labeled
// message on stderr). All file outputs are written atomically (temp +
// rename) and are byte-deterministic for fixed inputs, flags, and the
// QUADFLOW_THREADS environment variable.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quadflow/quadflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quadflow;

namespace {

// Compact time tag for file names: 0.5 -> "0.5", 0.125 -> "0.125".
std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

// Write through a sibling temp file and rename into place so a crash never
// leaves a partially written artifact and re-runs replace files atomically.
template <class Writer>
void atomic_write(const fs::path& target, Writer&& writer) {
  fs::path tmp = target;
  tmp += ".tmp";
  writer(tmp.string());
  fs::rename(tmp, target);
}

void atomic_write_image(const fs::path& target, const Image& img) {
  atomic_write(target, [&](const std::string& p) { write_image(img, p); });
}

void atomic_write_flow(const fs::path& target, const FlowField& flow) {
  atomic_write(target, [&](const std::string& p) { write_flo(flow, p); });
}

Image hole_mask_to_image(const HoleMask& holes) {
  Image img(holes.width, holes.height, 1);
  for (int y = 0; y < holes.height; ++y)
    for (int x = 0; x < holes.width; ++x)
      img.at(x, y) = holes.is_hole(x, y) ? 1.0 : 0.0;
  return img;
}

HoleMask image_to_hole_mask(const Image& img) {
  HoleMask holes(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      holes.set(x, y, luma(img, x, y) > 0.5);
  return holes;
}

MotionModel parse_model(const std::string& name) {
  if (name == "quadratic") return MotionModel::Quadratic;
  if (name == "linear") return MotionModel::Linear;
  throw std::invalid_argument("unknown motion model: " + name);
}

// Shared pipeline hyperparameters, exposed as flags on the commands that run
// the full pipeline (interpolate, eval).
struct PipelineFlags {
  double sigma = 1.0;
  double radius = 1.0;
  int filter_k = 2;
  double filter_tau = 2.0;
  HornSchunckParams hs;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sigma", sigma, "Gaussian splat width for flow reversal")
        ->capture_default_str();
    cmd->add_option("--radius", radius, "splat neighborhood radius (Chebyshev, exclusive)")
        ->capture_default_str();
    cmd->add_option("--filter-k", filter_k, "medoid filter half-window in pixels")
        ->capture_default_str();
    cmd->add_option("--filter-tau", filter_tau, "medoid outlier threshold in pixels")
        ->capture_default_str();
    attach_estimator(cmd, hs);
  }

  static void attach_estimator(CLI::App* cmd, HornSchunckParams& hs) {
    cmd->add_option("--alpha", hs.alpha, "optical-flow smoothness weight")
        ->capture_default_str();
    cmd->add_option("--levels", hs.pyramid_levels, "optical-flow pyramid levels")
        ->capture_default_str();
    cmd->add_option("--iterations", hs.iterations, "optical-flow iterations per level")
        ->capture_default_str();
  }

  InterpolateConfig config(MotionModel model, const FlowProvider& provider) const {
    InterpolateConfig cfg;
    cfg.model = model;
    cfg.sigma = sigma;
    cfg.radius = radius;
    cfg.filter_k = filter_k;
    cfg.filter_tau = filter_tau;
    cfg.provider = provider;
    return cfg;
  }
};

// Run one interpolation per requested time on its own thread; each output
// file is independent, and every stage inside is deterministic regardless of
// the thread budget, so concurrent times cannot change any artifact.
void interpolate_many(const Image& m1, const Image& f0, const Image& f1, const Image& f2,
                      const std::vector<double>& times, const InterpolateConfig& cfg,
                      const fs::path& out_dir) {
  std::vector<std::exception_ptr> errors(times.size());
  std::vector<std::thread> workers;
  workers.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        const Image out = interpolate(m1, f0, f1, f2, times[i], cfg);
        atomic_write_image(out_dir / ("out_t" + time_tag(times[i]) + ".pnm"), out);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- interpolate

struct InterpolateArgs {
  std::vector<std::string> inputs;
  std::vector<double> times{0.5};
  std::string model = "quadratic";
  std::string flows = "estimate";
  std::string out_dir;
  PipelineFlags pipeline;
};

int run_interpolate(const InterpolateArgs& args) {
  const Image m1 = read_image(args.inputs[0]);
  const Image f0 = read_image(args.inputs[1]);
  const Image f1 = read_image(args.inputs[2]);
  const Image f2 = read_image(args.inputs[3]);

  const FlowProvider provider = args.flows == "estimate"
                                    ? FlowProvider::estimator(args.pipeline.hs)
                                    : FlowProvider::files(args.flows);
  const InterpolateConfig cfg = args.pipeline.config(parse_model(args.model), provider);

  fs::create_directories(args.out_dir);
  interpolate_many(m1, f0, f1, f2, args.times, cfg, args.out_dir);
  return 0;
}

// ----------------------------------------------------------------------- synth

struct SynthArgs {
  std::string scene_path;
  int targets = 7;
  std::string out_dir;
};

int run_synth(const SynthArgs& args) {
  const SceneSpec scene = load_scene(args.scene_path);
  const QuartetRender q = render_quartet_with_targets(scene, uniform_target_times(args.targets));

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  atomic_write_image(out / "frame_-1.pnm", q.frame_m1);
  atomic_write_image(out / "frame_0.pnm", q.frame_0);
  atomic_write_image(out / "frame_1.pnm", q.frame_1);
  atomic_write_image(out / "frame_2.pnm", q.frame_2);
  for (const auto& [t, img] : q.targets)
    atomic_write_image(out / ("target_t" + time_tag(t) + ".pnm"), img);
  atomic_write_flow(out / "flow_0to1.flo", q.f01);
  atomic_write_flow(out / "flow_0to-1.flo", q.f0m1);
  atomic_write_flow(out / "flow_1to0.flo", q.f10);
  atomic_write_flow(out / "flow_1to2.flo", q.f12);
  return 0;
}

// --------------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string ref_path;
  std::string pred_path;
  bool with_asfp = false;
  std::string base_path;
};

int run_metrics(const MetricsArgs& args) {
  const Image ref = read_image(args.ref_path);
  const Image pred = read_image(args.pred_path);
  const QualityReport q = compute_quality(ref, pred);

  json record{{"ref", args.ref_path}, {"pred", args.pred_path},
              {"psnr", q.psnr},      {"ssim", q.ssim},
              {"ie", q.ie}};
  if (args.with_asfp) {
    const Image base = read_image(args.base_path);
    record["asfp"] = asfp_between(base, ref, pred);
  }
  std::cout << record.dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------------ flow

struct FlowEstimateArgs {
  std::string src_path, dst_path, out_path;
  HornSchunckParams hs;
};

int run_flow_estimate(const FlowEstimateArgs& args) {
  const Image src = read_image(args.src_path);
  const Image dst = read_image(args.dst_path);
  atomic_write_flow(args.out_path, estimate_flow(src, dst, args.hs));
  return 0;
}

struct FlowReverseArgs {
  std::string in_path, out_path, holes_path;
  double sigma = 1.0;
  double radius = 1.0;
};

int run_flow_reverse(const FlowReverseArgs& args) {
  const FlowField fwd = read_flo(args.in_path);
  const ReversalResult rev = reverse_flow(fwd, args.sigma, args.radius);
  atomic_write_flow(args.out_path, rev.flow);
  if (!args.holes_path.empty())
    atomic_write_image(args.holes_path, hole_mask_to_image(rev.holes));
  return 0;
}

struct FlowFilterArgs {
  std::string in_path, out_path, holes_path;
  int k = 2;
  double tau = 2.0;
};

int run_flow_filter(const FlowFilterArgs& args) {
  const FlowField in = read_flo(args.in_path);
  HoleMask holes(in.width, in.height);
  if (!args.holes_path.empty()) {
    const Image mask = read_image(args.holes_path);
    if (mask.width != in.width || mask.height != in.height)
      throw std::invalid_argument("flow filter: hole mask size does not match the flow field");
    holes = image_to_hole_mask(mask);
  }
  atomic_write_flow(args.out_path, filter_flow(in, holes, args.k, args.tau));
  return 0;
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
  std::string scene_path;
  std::vector<std::string> models{"quadratic", "linear"};
  int targets = 7;
  std::string flows = "analytic";
  PipelineFlags pipeline;
};

// Temporary directory holding the analytic ground-truth flows so the file
// provider can serve them; removed when the run finishes.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           (tag + "_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_eval(const EvalArgs& args) {
  const SceneSpec scene = load_scene(args.scene_path);
  const QuartetRender q = render_quartet_with_targets(scene, uniform_target_times(args.targets));

  FlowProvider provider;
  ScratchDir scratch("quadflow_eval");
  if (args.flows == "analytic") {
    atomic_write_flow(scratch.path / "flow_0to1.flo", q.f01);
    atomic_write_flow(scratch.path / "flow_0to-1.flo", q.f0m1);
    atomic_write_flow(scratch.path / "flow_1to0.flo", q.f10);
    atomic_write_flow(scratch.path / "flow_1to2.flo", q.f12);
    provider = FlowProvider::files((scratch.path / "flow_{src}to{dst}.flo").string());
  } else if (args.flows == "estimate") {
    provider = FlowProvider::estimator(args.pipeline.hs);
  } else {
    throw std::invalid_argument("eval: --flows must be 'analytic' or 'estimate'");
  }

  struct Row {
    std::string model;
    double psnr = 0, ssim = 0, ie = 0, asfp = 0;
  };
  std::vector<Row> rows;
  for (const std::string& name : args.models) {
    const InterpolateConfig cfg = args.pipeline.config(parse_model(name), provider);
    Row row{name};
    for (const auto& [t, gt] : q.targets) {
      const Image pred = interpolate(q.frame_m1, q.frame_0, q.frame_1, q.frame_2, t, cfg);
      const QualityReport m = compute_quality(gt, pred);
      row.psnr += m.psnr;
      row.ssim += m.ssim;
      row.ie += m.ie;
      row.asfp += asfp_between(q.frame_0, gt, pred);
    }
    const double n = static_cast<double>(q.targets.size());
    row.psnr /= n;
    row.ssim /= n;
    row.ie /= n;
    row.asfp /= n;
    rows.push_back(row);
  }

  std::printf("%-10s %10s %10s %10s %10s\n", "model", "psnr_db", "ssim", "ie", "asfp_px");
  for (const Row& r : rows)
    std::printf("%-10s %10.4f %10.6f %10.4f %10.4f\n", r.model.c_str(), r.psnr, r.ssim,
                r.ie, r.asfp);
  for (const Row& r : rows) {
    json record{{"model", r.model}, {"scene", args.scene_path}, {"flows", args.flows},
                {"targets", args.targets}, {"psnr", r.psnr}, {"ssim", r.ssim},
                {"ie", r.ie}, {"asfp", r.asfp}};
    std::cout << record.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadflow: quadratic-motion video frame interpolation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "quadflow 1.0.0");

  InterpolateArgs interp;
  CLI::App* c_interp =
      app.add_subcommand("interpolate", "synthesize frames between the middle frame pair");
  c_interp->add_option("--in", interp.inputs, "four input frames at times -1 0 1 2")
      ->expected(4)
      ->required();
  c_interp->add_option("--t", interp.times, "target times in (0,1), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  c_interp->add_option("--model", interp.model, "motion model")
      ->check(CLI::IsMember({"quadratic", "linear"}))
      ->capture_default_str();
  c_interp
      ->add_option("--flows", interp.flows,
                   "'estimate' or a .flo path template with {src} and {dst}")
      ->capture_default_str();
  c_interp->add_option("--out", interp.out_dir, "output directory")->required();
  interp.pipeline.attach(c_interp);

  SynthArgs synth;
  CLI::App* c_synth =
      app.add_subcommand("synth", "render an oracle scene with ground-truth flows");
  c_synth->add_option("--scene", synth.scene_path, "scene description file")->required();
  c_synth->add_option("--targets", synth.targets, "number of interior target frames")
      ->capture_default_str();
  c_synth->add_option("--out", synth.out_dir, "output directory")->required();

  MetricsArgs metrics;
  CLI::App* c_metrics =
      app.add_subcommand("metrics", "compare two images, printing one JSON record");
  c_metrics->add_option("--ref", metrics.ref_path, "reference image")->required();
  c_metrics->add_option("--pred", metrics.pred_path, "predicted image")->required();
  CLI::Option* asfp_flag =
      c_metrics->add_flag("--asfp", metrics.with_asfp, "also report feature-point drift");
  CLI::Option* base_opt = c_metrics->add_option(
      "--base", metrics.base_path, "frame the tracked feature points start from");
  asfp_flag->needs(base_opt);
  base_opt->needs(asfp_flag);

  CLI::App* c_flow = app.add_subcommand("flow", "standalone optical-flow stages");
  c_flow->require_subcommand(1);

  FlowEstimateArgs fest;
  CLI::App* c_fest = c_flow->add_subcommand("estimate", "optical flow between two images");
  c_fest->add_option("--src", fest.src_path, "source image")->required();
  c_fest->add_option("--dst", fest.dst_path, "target image")->required();
  c_fest->add_option("--out", fest.out_path, "output .flo path")->required();
  PipelineFlags::attach_estimator(c_fest, fest.hs);

  FlowReverseArgs frev;
  CLI::App* c_frev =
      c_flow->add_subcommand("reverse", "turn forward flow into backward flow by splatting");
  c_frev->add_option("--in", frev.in_path, "forward flow (.flo)")->required();
  c_frev->add_option("--sigma", frev.sigma, "Gaussian splat width")->capture_default_str();
  c_frev->add_option("--radius", frev.radius, "splat neighborhood radius")
      ->capture_default_str();
  c_frev->add_option("--out", frev.out_path, "reversed flow output (.flo)")->required();
  c_frev->add_option("--holes", frev.holes_path,
                     "optional hole mask output (.pgm, white = hole)");

  FlowFilterArgs ffil;
  CLI::App* c_ffil = c_flow->add_subcommand("filter", "medoid-filter a flow field");
  c_ffil->add_option("--in", ffil.in_path, "flow field (.flo)")->required();
  c_ffil->add_option("--holes", ffil.holes_path, "hole mask (.pgm, white = hole)");
  c_ffil->add_option("--k", ffil.k, "filter half-window in pixels")->capture_default_str();
  c_ffil->add_option("--tau", ffil.tau, "outlier threshold in pixels")->capture_default_str();
  c_ffil->add_option("--out", ffil.out_path, "filtered flow output (.flo)")->required();

  EvalArgs eval;
  CLI::App* c_eval =
      app.add_subcommand("eval", "compare motion models against a scene's ground truth");
  c_eval->add_option("--scene", eval.scene_path, "scene description file")->required();
  c_eval->add_option("--models", eval.models, "motion models to run, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  c_eval->add_option("--targets", eval.targets, "number of interior target frames")
      ->capture_default_str();
  c_eval->add_option("--flows", eval.flows, "'analytic' or 'estimate'")
      ->check(CLI::IsMember({"analytic", "estimate"}))
      ->capture_default_str();
  eval.pipeline.attach(c_eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "quadflow: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (c_interp->parsed()) return run_interpolate(interp);
    if (c_synth->parsed()) return run_synth(synth);
    if (c_metrics->parsed()) return run_metrics(metrics);
    if (c_fest->parsed()) return run_flow_estimate(fest);
    if (c_frev->parsed()) return run_flow_reverse(frev);
    if (c_ffil->parsed()) return run_flow_filter(ffil);
    if (c_eval->parsed()) return run_eval(eval);
    std::cerr << "quadflow: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "quadflow: " << e.what() << "\n";
    return 1;
  }
}
