#include "fgd/config.hpp"

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "fgd/image_io.hpp"

namespace fgd {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& s, const std::string& key) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("config: bad value for " + key + ": '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw std::invalid_argument("config: bad value for " + key + ": '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_step_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    out.push_back(parse_number<int>(trim(item), "schedule.step_list"));
  return out;
}

struct FilterSpec {
  std::string kind; // empty = invalid
  int factor = 0;   // > 0 only for the ilvr-N shorthand
};

FilterSpec parse_filter(const std::string& f) {
  if (f == "bilateral" || f == "ilvr" || f == "none") return {f, 0};
  if (f.rfind("ilvr-", 0) == 0) {
    const std::string tail = f.substr(5);
    int n = 0;
    const auto res = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (res.ec == std::errc{} && res.ptr == tail.data() + tail.size() && n >= 1)
      return {"ilvr", n};
  }
  return {};
}

} // namespace

void validate(const RunConfig& c) {
  const auto bad = [](const std::string& m) {
    throw std::invalid_argument("config: " + m);
  };
  if (c.train_steps < 1) bad("train_steps must be >= 1");
  if (!(c.beta_start > 0.0) || !(c.beta_end < 1.0) || c.beta_end < c.beta_start)
    bad("betas must satisfy 0 < beta_start <= beta_end < 1");
  if (c.steps < 1 || c.steps > c.train_steps) bad("steps must be in 1..train_steps");
  const SamplerKind kind = sampler_kind_from_string(c.sampler);
  init_mode_from_string(c.init);
  if (c.eta < 0.0) bad("eta must be >= 0");
  if (c.eta != 0.0 && kind != SamplerKind::ddim) bad("eta applies to ddim only");
  if (!(c.sdedit_strength > 0.0) || c.sdedit_strength > 1.0)
    bad("sdedit_strength must be in (0, 1]");
  if (c.height < 1 || c.width < 1) bad("image dimensions must be >= 1");
  if (c.channels < 1 || c.channels > 4) bad("channels must be 1..4");
  if (c.denoiser != "mixture" && c.denoiser != "gaussian")
    bad("denoiser must be mixture or gaussian");
  if (c.templates.empty()) bad("templates must name a kind or a directory");
  if (c.template_count < 1) bad("template_count must be >= 1");
  if (!(c.sigma0 > 0.0)) bad("sigma0 must be > 0");
  if (parse_filter(c.filter).kind.empty())
    bad("filter must be bilateral, ilvr, ilvr-N or none");
  if (!c.guide_path.empty() && !std::filesystem::exists(c.guide_path))
    bad("guide image not found: " + c.guide_path);
  if (!std::filesystem::is_directory(c.templates))
    template_kind_from_string(c.templates); // throws for unknown kinds
  if (!(c.sigma_spatial > 0.0)) bad("sigma_spatial must be > 0");
  if (!(c.sigma_value > 0.0)) bad("sigma_value must be > 0");
  if (c.radius < 0) bad("radius must be >= 0");
  if (c.ilvr_factor < 1) bad("ilvr_factor must be >= 1");
  if (!(c.delta > 0.0)) bad("delta must be > 0");
  if (c.t_stop < 0 || c.t_start < c.t_stop) bad("need t_start >= t_stop >= 0");
}

bool guidance_enabled(const RunConfig& c) {
  return c.guided && parse_filter(c.filter).kind != "none";
}

void apply_preset(RunConfig& c, const GuidancePreset& p) {
  c.sampler = p.sampler;
  c.init = p.init;
  c.steps = p.steps;
  c.t_start = p.t_start;
  c.t_stop = p.t_stop;
  c.delta = p.delta;
  c.sigma_spatial = p.sigma_spatial;
  c.sigma_value = p.sigma_value;
  c.filter = "bilateral";
  if (p.strength > 0.0) c.sdedit_strength = p.strength;
}

std::string to_kv(const RunConfig& c) {
  std::ostringstream o;
  o << "fgd_config_version=1\n";
  o << "schedule.train_steps=" << c.train_steps << "\n";
  o << "schedule.beta_start=" << fmt_double(c.beta_start) << "\n";
  o << "schedule.beta_end=" << fmt_double(c.beta_end) << "\n";
  o << "schedule.steps=" << c.steps << "\n";
  o << "schedule.step_list=";
  const VarianceSchedule chain = make_schedule(c);
  const std::vector<int>& list = chain.source_steps();
  for (std::size_t i = 0; i < list.size(); ++i) o << (i ? "," : "") << list[i];
  o << "\n";
  o << "sampler.kind=" << c.sampler << "\n";
  o << "sampler.eta=" << fmt_double(c.eta) << "\n";
  o << "sampler.init=" << c.init << "\n";
  o << "sampler.sdedit_strength=" << fmt_double(c.sdedit_strength) << "\n";
  o << "sampler.seed=" << c.seed << "\n";
  o << "image.height=" << c.height << "\n";
  o << "image.width=" << c.width << "\n";
  o << "image.channels=" << c.channels << "\n";
  o << "denoiser.kind=" << c.denoiser << "\n";
  o << "denoiser.templates=" << c.templates << "\n";
  o << "denoiser.template_count=" << c.template_count << "\n";
  o << "denoiser.template_seed=" << c.template_seed << "\n";
  o << "denoiser.sigma0=" << fmt_double(c.sigma0) << "\n";
  o << "guidance.enabled=" << (c.guided ? 1 : 0) << "\n";
  o << "guidance.guide=" << c.guide_path << "\n";
  o << "guidance.filter=" << c.filter << "\n";
  o << "guidance.sigma_spatial=" << fmt_double(c.sigma_spatial) << "\n";
  o << "guidance.sigma_value=" << fmt_double(c.sigma_value) << "\n";
  o << "guidance.radius=" << c.radius << "\n";
  o << "guidance.ilvr_factor=" << c.ilvr_factor << "\n";
  o << "guidance.delta=" << fmt_double(c.delta) << "\n";
  o << "guidance.t_start=" << c.t_start << "\n";
  o << "guidance.t_stop=" << c.t_stop << "\n";
  o << "output.record_structure=" << (c.record_structure ? 1 : 0) << "\n";
  return o.str();
}

RunConfig config_from_kv(const std::string& text, RunConfig base) {
  RunConfig c = base;
  std::optional<std::string> stored_steps;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "fgd_config_version") {
      if (parse_number<int>(val, key) != 1)
        throw std::invalid_argument("config: unsupported version " + val);
    } else if (key == "schedule.train_steps") {
      c.train_steps = parse_number<int>(val, key);
    } else if (key == "schedule.beta_start") {
      c.beta_start = parse_number<double>(val, key);
    } else if (key == "schedule.beta_end") {
      c.beta_end = parse_number<double>(val, key);
    } else if (key == "schedule.steps") {
      c.steps = parse_number<int>(val, key);
    } else if (key == "schedule.step_list") {
      stored_steps = val;
    } else if (key == "sampler.kind") {
      c.sampler = val;
    } else if (key == "sampler.eta") {
      c.eta = parse_number<double>(val, key);
    } else if (key == "sampler.init") {
      c.init = val;
    } else if (key == "sampler.sdedit_strength") {
      c.sdedit_strength = parse_number<double>(val, key);
    } else if (key == "sampler.seed") {
      c.seed = parse_number<std::uint64_t>(val, key);
    } else if (key == "image.height") {
      c.height = parse_number<int>(val, key);
    } else if (key == "image.width") {
      c.width = parse_number<int>(val, key);
    } else if (key == "image.channels") {
      c.channels = parse_number<int>(val, key);
    } else if (key == "denoiser.kind") {
      c.denoiser = val;
    } else if (key == "denoiser.templates") {
      c.templates = val;
    } else if (key == "denoiser.template_count") {
      c.template_count = parse_number<int>(val, key);
    } else if (key == "denoiser.template_seed") {
      c.template_seed = parse_number<std::uint64_t>(val, key);
    } else if (key == "denoiser.sigma0") {
      c.sigma0 = parse_number<double>(val, key);
    } else if (key == "guidance.enabled") {
      c.guided = parse_bool(val, key);
    } else if (key == "guidance.guide") {
      c.guide_path = val;
    } else if (key == "guidance.filter") {
      c.filter = val;
    } else if (key == "guidance.sigma_spatial") {
      c.sigma_spatial = parse_number<double>(val, key);
    } else if (key == "guidance.sigma_value") {
      c.sigma_value = parse_number<double>(val, key);
    } else if (key == "guidance.radius") {
      c.radius = parse_number<int>(val, key);
    } else if (key == "guidance.ilvr_factor") {
      c.ilvr_factor = parse_number<int>(val, key);
    } else if (key == "guidance.delta") {
      c.delta = parse_number<double>(val, key);
    } else if (key == "guidance.t_start") {
      c.t_start = parse_number<int>(val, key);
    } else if (key == "guidance.t_stop") {
      c.t_stop = parse_number<int>(val, key);
    } else if (key == "output.record_structure") {
      c.record_structure = parse_bool(val, key);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  if (stored_steps) {
    validate(c);
    if (parse_step_list(*stored_steps) != make_schedule(c).source_steps())
      throw std::invalid_argument(
          "config: schedule.step_list does not match the schedule fields");
  }
  return c;
}

std::uint64_t config_hash(const RunConfig& c) {
  const std::string text = to_kv(c);
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char b : text) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(c)));
  return std::string(buf, 16);
}

VarianceSchedule make_schedule(const RunConfig& c) {
  VarianceSchedule s = VarianceSchedule::linear(c.train_steps, c.beta_start, c.beta_end);
  if (c.steps == c.train_steps) return s;
  return s.respaced(c.steps);
}

std::vector<ImageBuffer> make_templates(const RunConfig& c) {
  if (std::filesystem::is_directory(c.templates)) {
    std::vector<ImageBuffer> t = load_templates(c.templates);
    const ImageBuffer probe(c.height, c.width, c.channels);
    if (!t.front().same_shape(probe))
      throw std::invalid_argument(
          "config: images in " + c.templates +
          " do not match image.height/width/channels");
    return t;
  }
  const TemplateKind kind = template_kind_from_string(c.templates);
  std::vector<ImageBuffer> t = make_test_templates(
      kind, std::max(c.height, c.width), c.template_count, c.template_seed, c.channels);
  if (c.height != c.width)
    for (ImageBuffer& img : t) img = bilinear_resize(img, c.height, c.width);
  return t;
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& c, const VarianceSchedule& chain,
                                        std::vector<ImageBuffer> templates) {
  if (c.denoiser == "gaussian")
    return std::make_unique<GaussianPrior>(chain, std::move(templates.at(0)), c.sigma0);
  return std::make_unique<TemplateMixture>(chain, std::move(templates),
                                           std::vector<double>{}, c.sigma0);
}

ImageBuffer make_guide(const RunConfig& c, const std::vector<ImageBuffer>& templates) {
  if (c.guide_path.empty()) return templates.at(0);
  ImageBuffer g = read_image(c.guide_path);
  if (g.channels() != c.channels)
    throw std::invalid_argument("config: guide image has " +
                                std::to_string(g.channels()) + " channels, run needs " +
                                std::to_string(c.channels));
  if (g.height() != c.height || g.width() != c.width) {
    std::cerr << "warning: resampling guide " << c.guide_path << " from " << g.width()
              << "x" << g.height() << " to " << c.width << "x" << c.height << "\n";
    g = bilinear_resize(g, c.height, c.width);
  }
  return g;
}

std::shared_ptr<const GuideFilter> make_filter(const RunConfig& c,
                                               const ImageBuffer& guide) {
  const FilterSpec spec = parse_filter(c.filter);
  if (spec.kind == "none") return nullptr;
  if (spec.kind == "ilvr")
    return std::make_shared<IlvrFilter>(spec.factor > 0 ? spec.factor : c.ilvr_factor);
  BilateralParams bp;
  bp.sigma_spatial = c.sigma_spatial;
  bp.sigma_value = c.sigma_value;
  bp.radius = c.radius;
  return std::make_shared<FilterTensor>(build_bilateral_tensor(guide, bp));
}

SamplerConfig make_sampler_config(const RunConfig& c, VarianceSchedule chain) {
  SamplerConfig sc{std::move(chain)};
  sc.kind = sampler_kind_from_string(c.sampler);
  sc.eta = c.eta;
  sc.seed = c.seed;
  sc.init = init_mode_from_string(c.init);
  sc.sdedit_strength = c.sdedit_strength;
  sc.height = c.height;
  sc.width = c.width;
  sc.channels = c.channels;
  sc.record_structure = c.record_structure;
  return sc;
}

} // namespace fgd
