// racer: command-line front end.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "racer/racer.hpp"

namespace {

using json = nlohmann::json;
using namespace racer;

enum ExitCode { kOk = 0, kFailure = 1, kNoMass = 2, kFormat = 3, kConfig = 4 };

struct Shared {
  int radius = 0;
  std::string backend = "exact-ring";
  std::string tie_break = "lexicographic";
  int threads = 0;  // 0: RACER_THREADS or 1
  std::uint64_t seed = 0;
  std::string output;

  int thread_count() const { return threads > 0 ? threads : default_threads(); }

  CenteringConfig centering() const {
    CenteringConfig cfg;
    cfg.radius = radius;
    cfg.tie_break = parse_tie_break(tie_break);
    cfg.backend.kind = parse_backend(backend);
    cfg.threads = thread_count();
    return cfg;
  }
};

void add_shared(CLI::App* cmd, Shared& s, bool needs_radius) {
  auto* r = cmd->add_option("-R,--radius", s.radius, "Upper bound on the object radius (pixels)");
  if (needs_radius) r->required();
  r->check(CLI::PositiveNumber);
  cmd->add_option("--backend", s.backend, "Ring-sum backend: exact-ring or polar-quadrature")
      ->capture_default_str();
  cmd->add_option("--tie-break", s.tie_break, "Tie-break rule (lexicographic)")->capture_default_str();
  cmd->add_option("--threads", s.threads, "Worker threads (default: RACER_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.seed, "Master random seed");
  cmd->add_option("-o,--output", s.output, "Output path");
}

/// Writes to the file named by `path`, or stdout when empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (file_.is_open()) {
      file_.flush();
      if (!file_) throw IoError("error writing output");
    }
  }

 private:
  std::ofstream file_;
};

json real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

// ---------------------------------------------------------------------------

int cmd_center(const Shared& s, const std::string& path, bool as_json) {
  const ImageGrid image = read_image(path);
  const CenterResult res = scm_center(image, s.centering());
  const double cost = res.landscape.min_cost();
  Sink out(s.output);
  if (as_json) {
    json j{{"center", {res.center.row, res.center.col}},
           {"cost", real(cost)},
           {"e_max", real(res.e_max)},
           {"backend", s.backend},
           {"R", s.radius}};
    out.stream() << j.dump() << '\n';
  } else {
    out.stream() << "center: " << res.center.row << ' ' << res.center.col << "  cost: " << format_real(cost)
                 << "  e_max: " << format_real(res.e_max) << '\n';
  }
  out.close();
  return kOk;
}

int cmd_landscape(const Shared& s, const std::string& path, const std::string& kind_name) {
  const LandscapeKind kind = parse_landscape_kind(kind_name);
  const ImageGrid image = normalize_nonneg(read_image(path));
  const CenteringConfig cfg = s.centering();
  Landscape land;
  switch (kind) {
    case LandscapeKind::scm:
    case LandscapeKind::scm_normalized:
      land = scm_landscape(image, cfg, kind);
      break;
    case LandscapeKind::gm:
      land = gm_landscape(image, Metric::composed, cfg.threads, cfg.tie_break);
      break;
    case LandscapeKind::local_gm:
      land = local_gm_landscape(image, cfg.radius, Metric::composed, cfg.threads, cfg.tie_break);
      break;
    case LandscapeKind::cm_variance:
      land = cm_variance_landscape(image, cfg.threads);
      break;
  }
  Sink out(s.output);
  out.stream() << "row,col,cost\n";
  for (std::size_t i = 0; i < land.cost.size(); ++i) {
    const PixelCoord p = land.domain.at(i);
    out.stream() << p.row << ',' << p.col << ',' << format_real(land.cost[i]) << '\n';
  }
  out.close();
  std::cerr << "argmin: " << land.argmin.row << ' ' << land.argmin.col << "  cost: " << format_real(land.min_cost())
            << "  kind: " << to_string(kind) << '\n';
  return kOk;
}

struct SynthArgs {
  int height = 101;
  int width = 101;
  std::string object = "blob";
  int object_radius = 20;
  std::string raster;
  int shift_row = 0;
  int shift_col = 0;
  std::string noise = "gaussian-iid";
  std::string snr = "inf";
};

double parse_snr_text(const std::string& text) { return detail::parse_snr(json(text)); }

int cmd_synth(const Shared& s, const SynthArgs& a) {
  if (s.output.empty()) throw ConfigError("synth needs --output PREFIX");
  SceneSpec spec;
  spec.extent = {a.height, a.width};
  spec.object.kind = parse_object_kind(a.object);
  spec.object.radius = a.object_radius;
  if (spec.object.kind == ObjectKind::raster) {
    if (a.raster.empty()) throw ConfigError("raster object needs --raster PATH");
    spec.object.raster = read_image(a.raster);
  }
  spec.shift = {a.shift_row, a.shift_col};
  const Scene scene = render_scene(spec, s.thread_count());
  const NoiseSpec noise{parse_noise_model(a.noise), parse_snr_text(a.snr), s.seed};
  const ImageGrid noisy = add_noise(scene.clean, noise);
  write_mrc({{scene.clean}, ""}, s.output + "_clean.mrc");
  write_mrc({{noisy}, ""}, s.output + "_noisy.mrc");
  const double measured = snr(scene.clean, noisy);
  json truth{{"truth", {scene.truth.row, scene.truth.col}},
             {"object_center", {scene.object_center.row, scene.object_center.col}},
             {"extent", {a.height, a.width}},
             {"object", a.object},
             {"object_radius", a.object_radius},
             {"noise_model", a.noise},
             {"target_snr", real(noise.target_snr)},
             {"measured_snr", real(measured)},
             {"seed", s.seed}};
  std::ofstream side(s.output + "_truth.json", std::ios::trunc);
  if (!side) throw IoError("cannot write '" + s.output + "_truth.json'");
  side << truth.dump(2) << '\n';
  std::cout << "truth: " << scene.truth.row << ' ' << scene.truth.col << "  snr: " << format_real(measured) << '\n';
  return kOk;
}

int cmd_bench(const Shared& s, const std::string& config_path, bool record_timing) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot open '" + config_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON in '" + config_path + "'", e.byte);
  }
  BenchConfig cfg = parse_bench_config(j, std::filesystem::path(config_path).parent_path());
  if (s.seed != 0) cfg.sweep.master_seed = s.seed;
  if (s.radius > 0) cfg.radius = s.radius;
  const BenchmarkTable table = run_bench(cfg, s.thread_count(), record_timing);
  Sink out(s.output);
  table.write_csv(out.stream());
  out.close();
  std::ostream& summary = s.output.empty() ? std::cerr : std::cout;
  summary << "method,noise_model,snr,mean_dev,median_dev,n,failures\n";
  for (const auto& c : table.summarize()) {
    summary << c.method << ',' << to_string(c.model) << ',' << format_real(c.snr) << ',' << format_real(c.mean)
            << ',' << format_real(c.median) << ',' << c.count << ',' << c.failures << '\n';
  }
  return kOk;
}

int cmd_stack_center(const Shared& s, const std::string& path, const std::string& shifted_path) {
  const ParticleStack stack = read_mrc(path);
  CenteringConfig cfg = s.centering();
  const int threads = cfg.threads;
  cfg.threads = 1;  // parallel across slices instead
  if (!stack.empty()) search_grid(stack.slices.front().extent(), cfg.radius);  // fail early on bad R
  std::vector<CenterRecord> records(stack.size());
  parallel_for(stack.size(), threads, [&](std::size_t i) {
    records[i].particle_index = i;
    try {
      const CenterResult res = scm_center(stack.slices[i], cfg);
      records[i].center = res.center;
      records[i].cost_min = res.landscape.min_cost();
      records[i].e_max = res.e_max;
    } catch (const NoMassError&) {
    }
  });
  Sink out(s.output);
  write_centers(out.stream(), records, s.backend, s.radius);
  out.close();
  if (!shifted_path.empty()) {
    ParticleStack shifted;
    shifted.slices.resize(stack.size(), ImageGrid(1, 1));
    parallel_for(stack.size(), threads, [&](std::size_t i) {
      const ImageGrid& slice = stack.slices[i];
      if (!records[i].center) {
        shifted.slices[i] = slice;
        return;
      }
      const PixelCoord o = slice.extent().origin();
      shifted.slices[i] = shift_image(slice, o.row - records[i].center->row, o.col - records[i].center->col);
    });
    write_mrc(shifted, shifted_path);
  }
  for (const auto& r : records) {
    if (!r.center) std::cerr << "warning: particle " << r.particle_index << " has no mass; skipped\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust translational centering of objects in noisy images"};
  app.require_subcommand(1);
  Shared shared;

  std::string image_path;
  bool as_json = false;
  auto* center = app.add_subcommand("center", "Estimate the center of the object in an image");
  add_shared(center, shared, true);
  center->add_option("image", image_path, "Input image (.pgm, .mrc)")->required();
  center->add_flag("--json", as_json, "Machine-readable output");

  std::string kind = "scm";
  auto* landscape = app.add_subcommand("landscape", "Write a cost landscape as CSV");
  add_shared(landscape, shared, true);
  landscape->add_option("image", image_path, "Input image (.pgm, .mrc)")->required();
  landscape->add_option("--kind", kind, "scm, scm-normalized, gm, local-gm or cm-variance")->capture_default_str();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Render a synthetic scene and a noisy copy");
  add_shared(synth, shared, false);
  synth->add_option("--height", synth_args.height)->capture_default_str();
  synth->add_option("--width", synth_args.width)->capture_default_str();
  synth->add_option("--object", synth_args.object, "disk, blob, hedgehog, elongated or raster")
      ->capture_default_str();
  synth->add_option("--object-radius", synth_args.object_radius)->capture_default_str();
  synth->add_option("--raster", synth_args.raster, "Silhouette image for --object raster");
  synth->add_option("--shift-row", synth_args.shift_row)->capture_default_str();
  synth->add_option("--shift-col", synth_args.shift_col)->capture_default_str();
  synth->add_option("--noise", synth_args.noise, "gaussian-iid, uniform-positive or colored")
      ->capture_default_str();
  synth->add_option("--snr", synth_args.snr, "Target SNR, e.g. 0.1, 1/45 or inf")->capture_default_str();

  std::string config_path;
  bool record_timing = false;
  auto* bench = app.add_subcommand("bench", "Run a noise sweep described by a JSON config");
  add_shared(bench, shared, false);
  bench->add_option("config", config_path, "Benchmark config (JSON)")->required();
  bench->add_flag("--record-timing", record_timing, "Fill the runtime_ms column (nondeterministic)");

  std::string stack_path;
  std::string shifted_path;
  auto* stack = app.add_subcommand("stack-center", "Center every particle of an MRC stack");
  add_shared(stack, shared, true);
  stack->add_option("stack", stack_path, "Particle stack (.mrcs)")->required();
  stack->add_option("--apply-shift", shifted_path, "Write the recentered stack to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*center) return cmd_center(shared, image_path, as_json);
    if (*landscape) return cmd_landscape(shared, image_path, kind);
    if (*synth) return cmd_synth(shared, synth_args);
    if (*bench) return cmd_bench(shared, config_path, record_timing);
    if (*stack) return cmd_stack_center(shared, stack_path, shifted_path);
  } catch (const NoMassError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoMass;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const UnsupportedFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const CorruptFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFormat;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
