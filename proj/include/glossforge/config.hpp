#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glossforge/errors.hpp"
#include "glossforge/fabrication.hpp"
#include "glossforge/geometry.hpp"
#include "glossforge/io.hpp"
#include "glossforge/simulator.hpp"
#include "glossforge/stitching.hpp"

namespace glossforge {

using json = nlohmann::json;

struct TilingSpec {
  int rows = 1;
  int cols = 1;
  double overlap = 0.3;
  int jitter_px = 0;

  bool operator==(const TilingSpec&) const = default;
};

/// Everything `simulate` needs: the painting, how it is tiled, how it is rendered.
struct SimulationSpec {
  SceneSpec scene;
  TilingSpec tiling;
  RenderOptions render;
};

/// A 512 x 256 px painting at 0.5 mm pitch scanned as a 2 x 2 grid: textured
/// relief with bumps and a raised block, disk and stripe gloss patterns.
inline SimulationSpec default_simulation() {
  SimulationSpec s;
  s.scene.width = 512;
  s.scene.height = 256;
  s.scene.pixel_pitch_um = 500.0;
  s.scene.height_layers = {TextureHeight{0.02, 24.0, 3}, BumpsHeight{12, 0.3, 12.0},
                           PlateauHeight{300, 60, 380, 120, 1.0}};
  s.scene.gloss_layers = {ConstantGloss{0.2}, StripesGloss{96.0, 24.0, 30.0, 0.35},
                          DiskGloss{120.0, 128.0, 50.0, 0.5}, DiskGloss{420.0, 180.0, 35.0, 0.08},
                          TextureGloss{0.03, 16.0, 2}};
  s.scene.albedo = {{0.45, 0.35, 0.25}, 0.12, 20.0, 3};
  s.tiling = {2, 2, 0.3, 0};
  return s;
}

struct MaskConfig {
  double normal_deg = 10.0;
  int infill_radius = 40;
};

struct FabricationConfig {
  double dpi = 450.0;
  double layer_thickness_um = 10.0;
  std::string gloss_curve;  ///< CSV path; empty selects the built-in calibration
};

struct EvaluationConfig {
  bool enabled = true;
  double noise_sigma = 0.005;
  int align_window = 8;
};

struct Seeds {
  std::uint64_t scene = 1;
  std::uint64_t noise = 2;
  std::uint64_t jitter = 3;
  std::uint64_t dither = 4;
};

struct PipelineConfig {
  ScannerConfig scanner;
  SimulationSpec simulation = default_simulation();
  MaskConfig mask;
  StitchParams stitch;
  FabricationConfig fabrication;
  EvaluationConfig evaluation;
  Seeds seeds;
};

namespace config_detail {

/// Reads members of one JSON object and rejects any key that was not consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw FormatError(where_ + ": expected an object");
  }

  template <typename T>
  Reader& get(const char* key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) {
      try {
        out = j_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw FormatError(where_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw FormatError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace config_detail

// ---- scanner ---------------------------------------------------------------

inline json to_json(const ScannerConfig& c) {
  return {{"theta_mount_rad", c.theta_mount},     {"lamp_distance_mm", c.lamp_distance_mm},
          {"camera_distance_mm", c.camera_distance_mm}, {"tile_width_mm", c.tile_width_mm},
          {"tile_height_mm", c.tile_height_mm},   {"pixel_pitch_um", c.pixel_pitch_um},
          {"lamp_width_mm", c.lamp_width_mm},     {"lamp_height_mm", c.lamp_height_mm},
          {"n1", c.media.n1},                     {"n2", c.media.n2}};
}

inline ScannerConfig scanner_from_json(const json& j, const std::string& where = "scanner") {
  ScannerConfig c;
  config_detail::Reader r(j, where);
  r.get("theta_mount_rad", c.theta_mount)
      .get("lamp_distance_mm", c.lamp_distance_mm)
      .get("camera_distance_mm", c.camera_distance_mm)
      .get("tile_width_mm", c.tile_width_mm)
      .get("tile_height_mm", c.tile_height_mm)
      .get("pixel_pitch_um", c.pixel_pitch_um)
      .get("lamp_width_mm", c.lamp_width_mm)
      .get("lamp_height_mm", c.lamp_height_mm)
      .get("n1", c.media.n1)
      .get("n2", c.media.n2);
  r.finish();
  c.validate();
  return c;
}

// ---- scene -----------------------------------------------------------------

inline json to_json(const HeightPrimitive& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantHeight>) return {{"type", "constant"}, {"value_mm", v.value_mm}};
        else if constexpr (std::is_same_v<T, RampHeight>)
          return {{"type", "ramp"}, {"slope_deg", v.slope_deg}, {"azimuth_deg", v.azimuth_deg}};
        else if constexpr (std::is_same_v<T, StepHeight>)
          return {{"type", "step"}, {"position_px", v.position_px}, {"along_x", v.along_x}, {"dh_mm", v.dh_mm}};
        else if constexpr (std::is_same_v<T, PlateauHeight>)
          return {{"type", "plateau"}, {"x0", v.x0}, {"y0", v.y0}, {"x1", v.x1}, {"y1", v.y1}, {"dh_mm", v.dh_mm}};
        else if constexpr (std::is_same_v<T, BumpsHeight>)
          return {{"type", "bumps"}, {"count", v.count}, {"amplitude_mm", v.amplitude_mm}, {"sigma_px", v.sigma_px}};
        else
          return {{"type", "texture"}, {"amplitude_mm", v.amplitude_mm}, {"scale_px", v.scale_px},
                  {"octaves", v.octaves}};
      },
      p);
}

inline json to_json(const GlossPrimitive& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantGloss>) return {{"type", "constant"}, {"value", v.value}};
        else if constexpr (std::is_same_v<T, DiskGloss>)
          return {{"type", "disk"}, {"cx", v.cx}, {"cy", v.cy}, {"radius", v.radius}, {"value", v.value}};
        else if constexpr (std::is_same_v<T, StripesGloss>)
          return {{"type", "stripes"}, {"period_px", v.period_px}, {"width_px", v.width_px},
                  {"angle_deg", v.angle_deg}, {"value", v.value}};
        else
          return {{"type", "texture"}, {"amplitude", v.amplitude}, {"scale_px", v.scale_px}, {"octaves", v.octaves}};
      },
      p);
}

inline HeightPrimitive height_primitive_from_json(const json& j, const std::string& where) {
  config_detail::Reader r(j, where);
  std::string type;
  r.get("type", type);
  HeightPrimitive out;
  if (type == "constant") {
    ConstantHeight p;
    r.get("value_mm", p.value_mm);
    out = p;
  } else if (type == "ramp") {
    RampHeight p;
    r.get("slope_deg", p.slope_deg).get("azimuth_deg", p.azimuth_deg);
    out = p;
  } else if (type == "step") {
    StepHeight p;
    r.get("position_px", p.position_px).get("along_x", p.along_x).get("dh_mm", p.dh_mm);
    out = p;
  } else if (type == "plateau") {
    PlateauHeight p;
    r.get("x0", p.x0).get("y0", p.y0).get("x1", p.x1).get("y1", p.y1).get("dh_mm", p.dh_mm);
    out = p;
  } else if (type == "bumps") {
    BumpsHeight p;
    r.get("count", p.count).get("amplitude_mm", p.amplitude_mm).get("sigma_px", p.sigma_px);
    out = p;
  } else if (type == "texture") {
    TextureHeight p;
    r.get("amplitude_mm", p.amplitude_mm).get("scale_px", p.scale_px).get("octaves", p.octaves);
    out = p;
  } else {
    throw DomainError(where + ": unknown height primitive '" + type + "'");
  }
  r.finish();
  return out;
}

inline GlossPrimitive gloss_primitive_from_json(const json& j, const std::string& where) {
  config_detail::Reader r(j, where);
  std::string type;
  r.get("type", type);
  GlossPrimitive out;
  if (type == "constant") {
    ConstantGloss p;
    r.get("value", p.value);
    out = p;
  } else if (type == "disk") {
    DiskGloss p;
    r.get("cx", p.cx).get("cy", p.cy).get("radius", p.radius).get("value", p.value);
    out = p;
  } else if (type == "stripes") {
    StripesGloss p;
    r.get("period_px", p.period_px).get("width_px", p.width_px).get("angle_deg", p.angle_deg).get("value", p.value);
    out = p;
  } else if (type == "texture") {
    TextureGloss p;
    r.get("amplitude", p.amplitude).get("scale_px", p.scale_px).get("octaves", p.octaves);
    out = p;
  } else {
    throw DomainError(where + ": unknown gloss primitive '" + type + "'");
  }
  r.finish();
  return out;
}

/// The scanner is not part of the scene JSON; it comes from the pipeline config.
inline json to_json(const SimulationSpec& s) {
  json heights = json::array(), glosses = json::array();
  for (const auto& p : s.scene.height_layers) heights.push_back(to_json(p));
  for (const auto& p : s.scene.gloss_layers) glosses.push_back(to_json(p));
  const auto& a = s.scene.albedo;
  return {{"width", s.scene.width},
          {"height", s.scene.height},
          {"pixel_pitch_um", s.scene.pixel_pitch_um},
          {"height_layers", heights},
          {"gloss_layers", glosses},
          {"albedo",
           {{"base", {a.base.r, a.base.g, a.base.b}},
            {"texture_amplitude", a.texture_amplitude},
            {"scale_px", a.scale_px},
            {"octaves", a.octaves}}},
          {"tiling",
           {{"rows", s.tiling.rows}, {"cols", s.tiling.cols}, {"overlap", s.tiling.overlap},
            {"jitter_px", s.tiling.jitter_px}}},
          {"render",
           {{"lobe_deg", s.render.lobe_deg}, {"noise_sigma", s.render.noise_sigma},
            {"shadows", s.render.shadows}}}};
}

/// Keys that are absent keep the values of default_simulation().
inline SimulationSpec simulation_from_json(const json& j, const std::string& where = "scene") {
  SimulationSpec s = default_simulation();
  config_detail::Reader r(j, where);
  r.get("width", s.scene.width).get("height", s.scene.height).get("pixel_pitch_um", s.scene.pixel_pitch_um);
  if (r.has("height_layers")) {
    const auto& arr = r.at("height_layers");
    if (!arr.is_array()) throw FormatError(r.path("height_layers") + ": expected an array");
    s.scene.height_layers.clear();
    for (std::size_t i = 0; i < arr.size(); ++i)
      s.scene.height_layers.push_back(
          height_primitive_from_json(arr[i], r.path("height_layers") + "[" + std::to_string(i) + "]"));
  }
  if (r.has("gloss_layers")) {
    const auto& arr = r.at("gloss_layers");
    if (!arr.is_array()) throw FormatError(r.path("gloss_layers") + ": expected an array");
    s.scene.gloss_layers.clear();
    for (std::size_t i = 0; i < arr.size(); ++i)
      s.scene.gloss_layers.push_back(
          gloss_primitive_from_json(arr[i], r.path("gloss_layers") + "[" + std::to_string(i) + "]"));
  }
  if (r.has("albedo")) {
    config_detail::Reader a(r.at("albedo"), r.path("albedo"));
    std::vector<double> base{s.scene.albedo.base.r, s.scene.albedo.base.g, s.scene.albedo.base.b};
    a.get("base", base)
        .get("texture_amplitude", s.scene.albedo.texture_amplitude)
        .get("scale_px", s.scene.albedo.scale_px)
        .get("octaves", s.scene.albedo.octaves);
    a.finish();
    if (base.size() != 3) throw FormatError(r.path("albedo") + ".base: expected three values");
    s.scene.albedo.base = {base[0], base[1], base[2]};
  }
  if (r.has("tiling")) {
    config_detail::Reader t(r.at("tiling"), r.path("tiling"));
    t.get("rows", s.tiling.rows).get("cols", s.tiling.cols).get("overlap", s.tiling.overlap).get("jitter_px", s.tiling.jitter_px);
    t.finish();
  }
  if (r.has("render")) {
    config_detail::Reader t(r.at("render"), r.path("render"));
    t.get("lobe_deg", s.render.lobe_deg).get("noise_sigma", s.render.noise_sigma).get("shadows", s.render.shadows);
    t.finish();
  }
  r.finish();
  return s;
}

// ---- pipeline --------------------------------------------------------------

inline json to_json(const PipelineConfig& c) {
  return {{"scanner", to_json(c.scanner)},
          {"scene", to_json(c.simulation)},
          {"mask", {{"normal_deg", c.mask.normal_deg}, {"infill_radius", c.mask.infill_radius}}},
          {"stitch",
           {{"color_weight", c.stitch.color_weight},
            {"height_weight", c.stitch.height_weight},
            {"blend_sigma", c.stitch.blend_sigma},
            {"search_window", c.stitch.search_window},
            {"min_overlap_fraction", c.stitch.min_overlap_fraction},
            {"flat_cost_ratio", c.stitch.flat_cost_ratio}}},
          {"fabrication",
           {{"dpi", c.fabrication.dpi},
            {"layer_thickness_um", c.fabrication.layer_thickness_um},
            {"gloss_curve", c.fabrication.gloss_curve}}},
          {"evaluation",
           {{"enabled", c.evaluation.enabled},
            {"noise_sigma", c.evaluation.noise_sigma},
            {"align_window", c.evaluation.align_window}}},
          {"seeds",
           {{"scene", c.seeds.scene}, {"noise", c.seeds.noise}, {"jitter", c.seeds.jitter}, {"dither", c.seeds.dither}}}};
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  config_detail::Reader r(j, "config");
  if (r.has("scanner")) c.scanner = scanner_from_json(r.at("scanner"), "config.scanner");
  if (r.has("scene")) c.simulation = simulation_from_json(r.at("scene"), "config.scene");
  if (r.has("mask")) {
    config_detail::Reader m(r.at("mask"), "config.mask");
    m.get("normal_deg", c.mask.normal_deg).get("infill_radius", c.mask.infill_radius);
    m.finish();
  }
  if (r.has("stitch")) {
    config_detail::Reader m(r.at("stitch"), "config.stitch");
    m.get("color_weight", c.stitch.color_weight)
        .get("height_weight", c.stitch.height_weight)
        .get("blend_sigma", c.stitch.blend_sigma)
        .get("search_window", c.stitch.search_window)
        .get("min_overlap_fraction", c.stitch.min_overlap_fraction)
        .get("flat_cost_ratio", c.stitch.flat_cost_ratio);
    m.finish();
  }
  if (r.has("fabrication")) {
    config_detail::Reader m(r.at("fabrication"), "config.fabrication");
    m.get("dpi", c.fabrication.dpi)
        .get("layer_thickness_um", c.fabrication.layer_thickness_um)
        .get("gloss_curve", c.fabrication.gloss_curve);
    m.finish();
  }
  if (r.has("evaluation")) {
    config_detail::Reader m(r.at("evaluation"), "config.evaluation");
    m.get("enabled", c.evaluation.enabled)
        .get("noise_sigma", c.evaluation.noise_sigma)
        .get("align_window", c.evaluation.align_window);
    m.finish();
  }
  if (r.has("seeds")) {
    config_detail::Reader m(r.at("seeds"), "config.seeds");
    m.get("scene", c.seeds.scene).get("noise", c.seeds.noise).get("jitter", c.seeds.jitter).get("dither", c.seeds.dither);
    m.finish();
  }
  r.finish();
  c.scanner.validate();
  if (c.mask.infill_radius < 1) throw DomainError("config.mask.infill_radius must be positive");
  if (!(c.fabrication.layer_thickness_um > 0.0)) throw DomainError("config.fabrication.layer_thickness_um must be positive");
  return c;
}

/// Short stable digest identifying a configuration in provenance records.
inline std::string config_hash(const PipelineConfig& c) { return io::sha256(to_json(c).dump()); }

// ---- gloss curve CSV -------------------------------------------------------

inline std::vector<GlossSample> parse_gloss_csv(const std::string& text, const std::string& name = "gloss curve") {
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  if (!std::getline(in, line) || trim(line) != "print_value,g60")
    throw FormatError(name + ": header 'print_value,g60' required");
  std::vector<GlossSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(name + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      std::size_t used_a = 0, used_b = 0;
      const std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
      GlossSample s{std::stod(a, &used_a), std::stod(b, &used_b)};
      if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing characters");
      out.push_back(s);
    } catch (const std::exception&) {
      throw FormatError(name + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

inline std::vector<GlossSample> read_gloss_csv(const std::filesystem::path& p) {
  return parse_gloss_csv(io::read_text(p), p.string());
}

}  // namespace glossforge
