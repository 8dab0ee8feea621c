// fgd: filter-guided diffusion sampling from the command line.
//
// Subcommands: run, sweep, ablate, bench, analyze, plot, presets.
// Exit codes: 0 success, 1 usage or config error, 2 runtime failure.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fgd/analysis.hpp"
#include "fgd/config.hpp"
#include "fgd/image_io.hpp"
#include "fgd/kernels.hpp"
#include "fgd/parallel.hpp"

namespace fs = std::filesystem;
using namespace fgd;

namespace {

/// Bad input (flags, config files, referenced paths) as opposed to failures
/// after a run started; main maps them to exit codes 1 and 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs the input-gathering part of a command; anything it throws is the
/// user's fault.
template <class F>
auto setup(F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
      throw std::invalid_argument("bad number in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::uint64_t v{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
      throw std::invalid_argument("bad seed in list: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

/// Mean absolute pixel difference, unfiltered.
double mean_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  return d_score(subtract(a, b));
}

// ---- option plumbing -------------------------------------------------------

/// Collects run options on a subcommand. Flags the user actually set are
/// applied onto the config after preset and file, so the precedence is
/// defaults, preset, file, command line.
struct RunOptions {
  std::string preset;
  std::string config_file;
  RunConfig v; // parse target; only fields with set flags are copied
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> appliers;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--preset", preset,
                    "Named parameter bundle (see the presets subcommand)");
    cmd->add_option("--config", config_file, "key=value config file");

    const auto opt = [&](const char* name, auto mem, const char* help) {
      CLI::Option* o = cmd->add_option(name, v.*mem, help);
      appliers.emplace_back(o, [this, mem](RunConfig& c) { c.*mem = v.*mem; });
    };

    opt("--train-steps", &RunConfig::train_steps, "Source chain length T");
    opt("--beta-start", &RunConfig::beta_start, "First beta of the linear ramp");
    opt("--beta-end", &RunConfig::beta_end, "Last beta of the linear ramp");
    opt("--steps", &RunConfig::steps, "Respaced chain length K");
    opt("--sampler", &RunConfig::sampler, "ddpm | ddim | plms");
    opt("--eta", &RunConfig::eta, "DDIM noise scale");
    opt("--init", &RunConfig::init, "noise | sdedit | invert");
    opt("--strength", &RunConfig::sdedit_strength, "SDEdit start fraction (0, 1]");
    opt("--seed", &RunConfig::seed, "Noise stream seed");
    opt("--height", &RunConfig::height, "Image height");
    opt("--width", &RunConfig::width, "Image width");
    opt("--channels", &RunConfig::channels, "Image channels (1-4)");
    opt("--denoiser", &RunConfig::denoiser, "mixture | gaussian");
    opt("--templates", &RunConfig::templates,
        "Template source: stripes | blobs | gradients | a directory");
    opt("--template-count", &RunConfig::template_count, "Synthetic template count");
    opt("--template-seed", &RunConfig::template_seed, "Synthetic template seed");
    opt("--sigma0", &RunConfig::sigma0, "Denoiser component std dev");
    opt("--guided", &RunConfig::guided, "1 = guided, 0 = plain sampling");
    opt("--guide", &RunConfig::guide_path, "Guide image (default: first template)");
    opt("--filter", &RunConfig::filter, "bilateral | ilvr | ilvr-N | none");
    opt("--sigma-spatial", &RunConfig::sigma_spatial, "Bilateral spatial sigma");
    opt("--sigma-value", &RunConfig::sigma_value, "Bilateral value sigma");
    opt("--radius", &RunConfig::radius, "Bilateral window radius (0 = 3 sigma)");
    opt("--ilvr-factor", &RunConfig::ilvr_factor, "ILVR downsampling factor");
    opt("--delta", &RunConfig::delta, "Guidance clamp scale");
    opt("--t-start", &RunConfig::t_start, "First guided step (chain index)");
    opt("--t-stop", &RunConfig::t_stop, "Last guided step (chain index)");
    opt("--record-structure", &RunConfig::record_structure,
        "Record per-step distance to the filtered guide");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!preset.empty()) {
      const GuidancePreset* p = find_preset(preset);
      if (!p) throw std::invalid_argument("unknown preset: " + preset);
      apply_preset(c, *p);
    }
    if (!config_file.empty()) c = config_from_kv(read_text_file(config_file), c);
    for (const auto& [o, apply] : appliers)
      if (o->count() > 0) apply(c);
    validate(c);
    return c;
  }
};

// ---- assembled run ---------------------------------------------------------

struct Assembled {
  VarianceSchedule chain;
  std::unique_ptr<Denoiser> denoiser;
  ImageBuffer guide;
  std::shared_ptr<const GuideFilter> filter; // null = unguided
  SamplerConfig sampler;
};

Assembled assemble(const RunConfig& cfg) {
  VarianceSchedule chain = make_schedule(cfg);
  std::vector<ImageBuffer> templates = make_templates(cfg);
  ImageBuffer guide = make_guide(cfg, templates);
  std::unique_ptr<Denoiser> den = make_denoiser(cfg, chain, std::move(templates));
  std::shared_ptr<const GuideFilter> filter;
  if (guidance_enabled(cfg)) filter = make_filter(cfg, guide);
  SamplerConfig sc = make_sampler_config(cfg, chain);
  return {std::move(chain), std::move(den), std::move(guide), std::move(filter),
          std::move(sc)};
}

const ImageBuffer* init_image_for(const Assembled& a) {
  return a.sampler.init == InitMode::noise ? nullptr : &a.guide;
}

std::string trace_csv(const Trajectory& traj) {
  std::ostringstream o;
  o << "# fgd-trace-v1\n";
  o << "t,d_score,lambda,l1_to_guide_filtered\n";
  for (const StepRecord& r : traj.steps)
    o << r.t << "," << fmt(r.d_score) << "," << fmt(r.lambda) << ","
      << fmt(r.l1_to_guide_filtered) << "\n";
  return o.str();
}

int cmd_run(const RunOptions& ro, const std::string& out_root, bool save_filter) {
  const RunConfig cfg = setup([&] { return ro.resolve(); });
  Assembled a = setup([&] { return assemble(cfg); });
  GuidanceState gs;
  GuidanceState* gsp = nullptr;
  if (a.filter) {
    gs = make_guidance_state(a.filter, a.guide, cfg.delta, cfg.t_start, cfg.t_stop);
    gsp = &gs;
  }

  const fs::path dir = fs::path(out_root) / ("run-" + config_hash_hex(cfg));
  bool created = false;
  try {
    const Trajectory traj = run_sampler(*a.denoiser, a.sampler, gsp, init_image_for(a));

    fs::create_directories(dir);
    created = true;
    write_text_file(dir / "manifest.cfg", to_kv(cfg));
    write_text_file(dir / "trace.csv", trace_csv(traj));
    write_png(traj.final_x, (dir / "final.png").string());
    write_png(a.guide, (dir / "guide.png").string());
    if (save_filter && a.filter)
      if (const auto* ft = dynamic_cast<const FilterTensor*>(a.filter.get()))
        ft->save((dir / "filter.fgdt").string());

    std::cout << "run dir: " << dir.string() << "\n";
    if (a.filter) {
      std::cout << "final |x - guide| (mean): "
                << fmt(mean_abs_diff(traj.final_x, a.guide)) << "\n";
      std::cout << "final structure distance: "
                << fmt(structure_distance(traj.final_x, a.guide, *a.filter)) << "\n";
    }
    return 0;
  } catch (...) {
    // Half-written run directories would poison later aggregation.
    if (created) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
    throw;
  }
}

// Sweeps and ablations share one results schema.
constexpr const char* kAggregateHeader =
    "# fgd-aggregate-v1\n"
    "filter,sigma_spatial,sigma_value,ilvr_factor,delta,seed,"
    "final_d_score,final_l1,final_structure\n";

std::string aggregate_row(const RunConfig& cfg, const Assembled& a,
                          const Trajectory& traj, const GuidanceState& gs) {
  std::ostringstream o;
  o << cfg.filter << "," << fmt(cfg.sigma_spatial) << "," << fmt(cfg.sigma_value) << ","
    << cfg.ilvr_factor << "," << fmt(cfg.delta) << "," << cfg.seed << ","
    << fmt(gs.trace.empty() ? 0.0 : gs.trace.back().d_score) << ","
    << fmt(mean_abs_diff(traj.final_x, a.guide)) << ","
    << fmt(structure_distance(traj.final_x, a.guide, *a.filter)) << "\n";
  return o.str();
}

int cmd_sweep(const RunOptions& ro, const std::string& deltas_arg,
              const std::string& seeds_arg, int jobs, const std::string& out_root) {
  const std::vector<double> deltas = setup([&] { return parse_double_list(deltas_arg); });
  const std::vector<std::uint64_t> seeds =
      setup([&] { return parse_seed_list(seeds_arg); });
  const RunConfig base = setup([&] {
    RunConfig c = ro.resolve();
    if (!guidance_enabled(c))
      throw std::invalid_argument("sweep varies guidance; do not disable it");
    return c;
  });
  Assembled a = setup([&] { return assemble(base); });

  struct Point {
    double delta;
    std::uint64_t seed;
  };
  std::vector<Point> grid;
  for (const double d : deltas)
    for (const std::uint64_t s : seeds) grid.push_back({d, s});
  std::vector<std::string> rows(grid.size());

  // Parallelism is across runs; each run itself stays sequential.
  const int workers = std::clamp(jobs > 0 ? jobs : job_count(), 1,
                                 static_cast<int>(grid.size()));
  if (workers > 1) set_jobs(1);

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  const auto worker = [&] {
    try {
      for (std::size_t i; (i = cursor.fetch_add(1)) < grid.size();) {
        RunConfig cfg = base;
        cfg.delta = grid[i].delta;
        cfg.seed = grid[i].seed;
        GuidanceState gs =
            make_guidance_state(a.filter, a.guide, cfg.delta, cfg.t_start, cfg.t_stop);
        SamplerConfig sc = a.sampler;
        sc.seed = cfg.seed;
        const Trajectory traj = run_sampler(*a.denoiser, sc, &gs, init_image_for(a));
        rows[i] = aggregate_row(cfg, a, traj, gs);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::string csv = kAggregateHeader;
  for (const std::string& r : rows) csv += r;
  fs::create_directories(out_root);
  const fs::path out = fs::path(out_root) / "aggregate.csv";
  write_text_file(out, csv);
  std::cout << grid.size() << " runs, wrote " << out.string() << "\n";
  return 0;
}

int cmd_ablate(const RunOptions& ro, const std::string& out_root) {
  const RunConfig base = setup([&] {
    RunConfig c = ro.resolve();
    c.guided = true;
    return c;
  });

  std::string csv = kAggregateHeader;
  const auto run_one = [&](const RunConfig& cfg) {
    Assembled a = assemble(cfg);
    GuidanceState gs =
        make_guidance_state(a.filter, a.guide, cfg.delta, cfg.t_start, cfg.t_stop);
    const Trajectory traj = run_sampler(*a.denoiser, a.sampler, &gs, init_image_for(a));
    csv += aggregate_row(cfg, a, traj, gs);
  };

  for (const double ss : {3.0, 5.0, 11.0})
    for (const double sv : {0.1, 0.35, 0.5}) {
      RunConfig cfg = base;
      cfg.filter = "bilateral";
      cfg.sigma_spatial = ss;
      cfg.sigma_value = sv;
      run_one(cfg);
      std::cout << "bilateral sigma_spatial=" << fmt(ss) << " sigma_value=" << fmt(sv)
                << " done\n";
    }
  for (const int n : {4, 8, 16, 32}) {
    if (n >= std::min(base.height, base.width)) {
      std::cout << "ilvr factor=" << n << " skipped (image too small)\n";
      continue;
    }
    RunConfig cfg = base;
    cfg.filter = "ilvr";
    cfg.ilvr_factor = n;
    run_one(cfg);
    std::cout << "ilvr factor=" << n << " done\n";
  }

  fs::create_directories(out_root);
  const fs::path out = fs::path(out_root) / "ablate.csv";
  write_text_file(out, csv);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

struct Timing {
  double mean = 0.0;
  double sd = 0.0;
};

template <class F>
Timing time_reps(int reps, F&& f) {
  std::vector<double> xs(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    xs[static_cast<std::size_t>(r)] = dt.count();
  }
  Timing t;
  for (const double x : xs) t.mean += x;
  t.mean /= reps;
  if (reps > 1) {
    double acc = 0.0;
    for (const double x : xs) acc += (x - t.mean) * (x - t.mean);
    t.sd = std::sqrt(acc / (reps - 1));
  }
  return t;
}

int cmd_bench(const RunOptions& ro, int repeats, const std::string& out_root) {
  RunConfig cfg = setup([&] {
    RunConfig c = ro.resolve();
    if (!guidance_enabled(c))
      throw std::invalid_argument("bench compares guided and plain runs; keep a filter");
    return c;
  });
  if (repeats < 1) throw UsageError("bench: --repeats must be >= 1");
  cfg.record_structure = false; // diagnostics stay out of the timed loop
  Assembled a = setup([&] { return assemble(cfg); });

  const Timing floor = time_reps(repeats, [] {});
  const Timing build = time_reps(repeats, [&] { make_filter(cfg, a.guide); });
  ImageBuffer sink;
  const Timing apply = time_reps(repeats, [&] { sink = a.filter->apply(a.guide); });
  const Timing plain = time_reps(
      repeats, [&] { run_sampler(*a.denoiser, a.sampler, nullptr, init_image_for(a)); });
  GuidanceState gs =
      make_guidance_state(a.filter, a.guide, cfg.delta, cfg.t_start, cfg.t_stop);
  gs.always_score = false; // off-window scoring is a diagnostic, not guidance cost
  const Timing guided = time_reps(
      repeats, [&] { run_sampler(*a.denoiser, a.sampler, &gs, init_image_for(a)); });

  const int steps = a.sampler.init == InitMode::sdedit
                        ? std::clamp(static_cast<int>(
                                         std::lround(cfg.sdedit_strength * cfg.steps)),
                                     1, cfg.steps)
                        : cfg.steps;

  std::ostringstream csv;
  csv << "# fgd-bench-v1\n";
  csv << "metric,repeats,mean_seconds,std_seconds\n";
  const auto row = [&](const char* name, const Timing& t) {
    csv << name << "," << repeats << "," << fmt(t.mean) << "," << fmt(t.sd) << "\n";
  };
  row("timer_floor", floor);
  row("filter_build", build);
  row("filter_apply", apply);
  row("run_plain", plain);
  row("run_guided", guided);
  fs::create_directories(out_root);
  const fs::path out = fs::path(out_root) / "bench.csv";
  write_text_file(out, csv.str());

  std::cout << "kernel backend: " << kern::active_isa() << "\n";
  std::cout << "filter build:  " << fmt(build.mean) << " s\n";
  std::cout << "filter apply:  " << fmt(apply.mean) << " s\n";
  std::cout << "plain run:     " << fmt(plain.mean) << " s\n";
  std::cout << "guided run:    " << fmt(guided.mean) << " s\n";
  std::cout << "per-step overhead: " << fmt((guided.mean - plain.mean) / steps)
            << " s over " << steps << " steps\n";
  std::cout << "overhead ratio: " << fmt(guided.mean / plain.mean) << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_analyze(const std::string& input, const std::string& output) {
  const ImageBuffer img = setup([&] { return read_image(input); });
  const RadialSpectrum rs = radial_amplitude_spectrum(img);
  std::ostringstream csv;
  csv << "# fgd-spectrum-v1\n";
  csv << "band,amplitude,count\n";
  for (std::size_t b = 0; b < rs.amplitude.size(); ++b)
    csv << b << "," << fmt(rs.amplitude[b]) << "," << rs.count[b] << "\n";
  write_text_file(output, csv.str());
  std::cout << "bands: " << rs.amplitude.size() << "\n";
  try {
    std::cout << "log-log slope: " << fmt(spectrum_slope(rs)) << "\n";
  } catch (const std::exception&) {
    std::cout << "log-log slope: undefined\n";
  }
  std::cout << "wrote " << output << "\n";
  return 0;
}

// ---- trace plotting ---------------------------------------------------------

struct TraceRow {
  double t, d_score, lambda;
};

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string cell;
    TraceRow r{};
    if (!std::getline(ls, cell, ',')) continue;
    r.t = std::stod(cell);
    if (!std::getline(ls, cell, ',')) continue;
    r.d_score = std::stod(cell);
    if (!std::getline(ls, cell, ',')) continue;
    r.lambda = std::stod(cell);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);
  return rows;
}

std::string polyline(const std::vector<TraceRow>& rows, double TraceRow::*field,
                     double ymax, const char* color) {
  // Plot area: x in [60, 620], y in [20, 320]; rows are in chain order.
  std::ostringstream o;
  o << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 60.0 + 560.0 * (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1));
    const double v = std::clamp(rows[i].*field / ymax, 0.0, 1.0);
    o << x << "," << 320.0 - 300.0 * v << " ";
  }
  o << "'/>";
  return o.str();
}

int cmd_plot(const std::string& input, const std::string& output) {
  const std::vector<TraceRow> rows = setup([&] { return read_trace_csv(input); });
  double dmax = 0.0;
  for (const TraceRow& r : rows) dmax = std::max(dmax, r.d_score);
  if (dmax <= 0.0) dmax = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='640' height='360' "
         "viewBox='0 0 640 360'>\n";
  svg << "<rect width='640' height='360' fill='white'/>\n";
  svg << "<line x1='60' y1='320' x2='620' y2='320' stroke='black'/>\n";
  svg << "<line x1='60' y1='20' x2='60' y2='320' stroke='black'/>\n";
  svg << polyline(rows, &TraceRow::d_score, dmax, "#1f77b4") << "\n";
  svg << polyline(rows, &TraceRow::lambda, 1.0, "#d62728") << "\n";
  svg << "<text x='70' y='34' fill='#1f77b4' font-size='13'>d_score (max "
      << fmt(dmax) << ")</text>\n";
  svg << "<text x='70' y='52' fill='#d62728' font-size='13'>lambda (0..1)</text>\n";
  svg << "<text x='300' y='345' font-size='13'>chain steps, early to late</text>\n";
  svg << "</svg>\n";
  write_text_file(output, svg.str());
  std::cout << "wrote " << output << "\n";
  return 0;
}

int cmd_presets() {
  std::cout << "name         sampler  init    steps  window        delta  filter\n";
  for (const GuidancePreset& p : guidance_presets()) {
    std::ostringstream win;
    win << "[" << p.t_stop << ", " << p.t_start << "]";
    std::printf("%-12s %-8s %-7s %-6d %-13s %-6g sigma_s=%g sigma_v=%g", p.name,
                p.sampler, p.init, p.steps, win.str().c_str(), p.delta, p.sigma_spatial,
                p.sigma_value);
    if (p.strength > 0.0) std::printf(" strength=%g", p.strength);
    std::printf("\n");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filter-guided diffusion sampling"};
  app.require_subcommand(1);

  // run
  CLI::App* run = app.add_subcommand("run", "One sampling run into a run directory");
  RunOptions run_opts;
  run_opts.add_to(run);
  std::string run_out = "runs";
  bool save_filter = false;
  run->add_option("--out", run_out, "Output root directory");
  run->add_flag("--save-filter", save_filter, "Also dump the packed filter tensor");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "Delta x seed grid, aggregated CSV");
  RunOptions sweep_opts;
  sweep_opts.add_to(sweep);
  std::string sweep_deltas = "0.5,0.2,0.05";
  std::string sweep_seeds = "0,1,2,3";
  std::string sweep_out = "runs";
  int sweep_jobs = 0;
  sweep->add_option("--deltas", sweep_deltas, "Comma list of delta values");
  sweep->add_option("--seeds", sweep_seeds, "Comma list of seeds");
  sweep->add_option("--jobs", sweep_jobs, "Concurrent runs (default FGD_JOBS)");
  sweep->add_option("--out", sweep_out, "Output root directory");

  // ablate
  CLI::App* ablate =
      app.add_subcommand("ablate", "Fixed filter grid (bilateral sigmas, ILVR factors)");
  RunOptions ablate_opts;
  ablate_opts.add_to(ablate);
  std::string ablate_out = "runs";
  ablate->add_option("--out", ablate_out, "Output root directory");

  // bench
  CLI::App* bench =
      app.add_subcommand("bench", "Filter build, apply and run timings, mean and sigma");
  RunOptions bench_opts;
  bench_opts.add_to(bench);
  int bench_repeats = 20;
  std::string bench_out = "runs";
  bench->add_option("--repeats", bench_repeats, "Timed repetitions per metric");
  bench->add_option("--out", bench_out, "Output root directory");

  // analyze
  CLI::App* analyze = app.add_subcommand("analyze", "Radial spectrum of an image");
  std::string analyze_input, analyze_output = "spectrum.csv";
  analyze->add_option("--input", analyze_input, "Image file (.png/.pgm/.ppm)")
      ->required();
  analyze->add_option("--output", analyze_output, "Spectrum CSV path");

  // plot
  CLI::App* plot = app.add_subcommand("plot", "Render a trace.csv as an SVG");
  std::string plot_input, plot_output = "trace.svg";
  plot->add_option("--input", plot_input, "trace.csv path")->required();
  plot->add_option("--output", plot_output, "SVG path");

  // presets
  app.add_subcommand("presets", "List the named parameter bundles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, run_out, save_filter);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_deltas, sweep_seeds, sweep_jobs, sweep_out);
    if (ablate->parsed()) return cmd_ablate(ablate_opts, ablate_out);
    if (bench->parsed()) return cmd_bench(bench_opts, bench_repeats, bench_out);
    if (analyze->parsed()) return cmd_analyze(analyze_input, analyze_output);
    if (plot->parsed()) return cmd_plot(plot_input, plot_output);
    return cmd_presets();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
