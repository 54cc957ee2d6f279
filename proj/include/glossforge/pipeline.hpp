#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "glossforge/config.hpp"
#include "glossforge/evaluation.hpp"
#include "glossforge/fabrication.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/io.hpp"
#include "glossforge/masking.hpp"
#include "glossforge/simulator.hpp"
#include "glossforge/stitching.hpp"

namespace glossforge::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "1.0.0";
inline const std::vector<std::string> kStages{"simulate", "extract", "mask", "stitch", "fabricate", "evaluate"};

/// A stage failed; carries the stage name and the process exit status to use.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& what, int exit_code)
      : Error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// Runs fn(0..n-1) on up to `jobs` threads. Units must write disjoint outputs.
/// The exception of the lowest failing index is rethrown.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- tile index ------------------------------------------------------------

struct TileRecord {
  std::string name;
  GridPos grid_pos;
  PixelOffset nominal;
  PixelOffset actual;
  int width = 0;
  int height = 0;
};

struct TileIndex {
  int rows = 0;
  int cols = 0;
  double pixel_pitch_um = 0.0;
  std::vector<TileRecord> tiles;  ///< row-major
};

inline std::string tile_name(GridPos g) { return "r" + std::to_string(g.row) + "c" + std::to_string(g.col); }

inline json to_json(const TileIndex& t) {
  json tiles = json::array();
  for (const auto& r : t.tiles)
    tiles.push_back({{"name", r.name},
                     {"row", r.grid_pos.row},
                     {"col", r.grid_pos.col},
                     {"nominal", {r.nominal.dx, r.nominal.dy}},
                     {"actual", {r.actual.dx, r.actual.dy}},
                     {"width", r.width},
                     {"height", r.height}});
  return {{"rows", t.rows}, {"cols", t.cols}, {"pixel_pitch_um", t.pixel_pitch_um}, {"tiles", tiles}};
}

inline TileIndex read_tile_index(const fs::path& dir) {
  const json j = io::read_json(dir / "tiles.json");
  TileIndex t;
  try {
    t.rows = j.at("rows");
    t.cols = j.at("cols");
    t.pixel_pitch_um = j.at("pixel_pitch_um");
    for (const auto& e : j.at("tiles")) {
      TileRecord r;
      r.name = e.at("name");
      r.grid_pos = {e.at("row"), e.at("col")};
      r.nominal = {e.at("nominal")[0], e.at("nominal")[1]};
      r.actual = {e.at("actual")[0], e.at("actual")[1]};
      r.width = e.at("width");
      r.height = e.at("height");
      t.tiles.push_back(r);
    }
  } catch (const json::exception& e) {
    throw FormatError((dir / "tiles.json").string() + ": " + e.what());
  }
  if (t.rows < 1 || t.cols < 1 || t.tiles.size() != static_cast<std::size_t>(t.rows * t.cols))
    throw FormatError((dir / "tiles.json").string() + ": tile count does not match the grid");
  return t;
}

// ---- shared file helpers ---------------------------------------------------

inline json gloss_sidecar(const GlossMap& g) {
  return {{"scale_min", g.scale_min}, {"scale_max", g.scale_max}, {"normalized", g.normalized}};
}

inline void write_gloss(const fs::path& stem, const GlossMap& g, double pitch_um) {
  io::write_gfr1(stem.string() + ".gfr", g.values, pitch_um);
  io::write_json(stem.string() + ".json", gloss_sidecar(g));
}

inline GlossMap read_gloss(const fs::path& stem) {
  GlossMap g;
  g.values = io::read_gfr1(stem.string() + ".gfr").values;
  const json j = io::read_json(stem.string() + ".json");
  try {
    g.scale_min = j.at("scale_min");
    g.scale_max = j.at("scale_max");
    g.normalized = j.at("normalized");
  } catch (const json::exception& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  }
  return g;
}

inline HeightMap read_height(const fs::path& p) {
  auto r = io::read_gfr1(p);
  return HeightMap{std::move(r.values), r.pixel_pitch_um};
}

/// Provenance record listing every file of the stage directory with its checksum.
inline void write_provenance(const fs::path& dir, const std::string& stage, const PipelineConfig& cfg,
                             const json& extra = json::object()) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "provenance.json")
      files.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(files.begin(), files.end());
  json outputs = json::object();
  for (const auto& f : files) outputs[f] = io::sha256_file(dir / f);
  json p = {{"tool", "glossforge"}, {"version", kVersion}, {"stage", stage}, {"config_hash", config_hash(cfg)},
            {"seeds", {{"scene", cfg.seeds.scene}, {"noise", cfg.seeds.noise}, {"jitter", cfg.seeds.jitter},
                       {"dither", cfg.seeds.dither}}},
            {"outputs", outputs}};
  for (const auto& [k, v] : extra.items()) p[k] = v;
  io::write_json(dir / "provenance.json", p);
}

inline SyntheticScene build_scene(const PipelineConfig& cfg) {
  SceneSpec spec = cfg.simulation.scene;
  spec.seed = cfg.seeds.scene;
  spec.scanner = cfg.scanner;
  return make_scene(spec);
}

// ---- stages ----------------------------------------------------------------

/// Synthetic scan: ground truth plus one polarized pair, colour and height per tile.
inline void simulate(const PipelineConfig& cfg, const fs::path& out, int jobs = 1) {
  fs::create_directories(out / "tiles");
  const SyntheticScene scene = build_scene(cfg);
  const double pitch = scene.height.pixel_pitch_um;
  json spec = to_json(cfg.simulation);
  spec["seed"] = cfg.seeds.scene;
  io::write_json(out / "scene.json", spec);
  io::write_gfr1(out / "truth_height.gfr", scene.height.values, pitch);
  io::write_gfr1(out / "truth_gloss.gfr", scene.rho_s, pitch);
  io::write_png_rgb16(out / "truth_color.png", scene.rho_d);

  const auto& t = cfg.simulation.tiling;
  const auto placements = plan_tiles(scene.rho_s.width(), scene.rho_s.height(), t.rows, t.cols, t.overlap,
                                     t.jitter_px, cfg.seeds.jitter);
  TileIndex index{t.rows, t.cols, pitch, {}};
  for (const auto& p : placements)
    index.tiles.push_back({tile_name(p.grid_pos), p.grid_pos, p.nominal, p.actual, p.width, p.height});

  std::vector<std::size_t> clamped(placements.size(), 0);
  parallel_for(placements.size(), jobs, [&](std::size_t i) {
    const auto& p = placements[i];
    const SyntheticScene sub = cut_scene(scene, p);
    RenderOptions opt = cfg.simulation.render;
    opt.noise_seed = rng::hash(cfg.seeds.noise, i);
    const RenderResult res = render_pair(sub, opt);
    std::size_t above = 0;
    for (const auto* img : {&res.pair.i1, &res.pair.i2})
      for (const Rgb& v : img->pixels()) above += (v.r > 1.0) + (v.g > 1.0) + (v.b > 1.0);
    clamped[i] = res.clamped + above;
    const fs::path stem = out / "tiles" / index.tiles[i].name;
    io::write_png_rgb16(stem.string() + "_p0.png", res.pair.i1);
    io::write_png_rgb16(stem.string() + "_p90.png", res.pair.i2);
    io::write_png_rgb16(stem.string() + "_color.png", sub.rho_d);
    io::write_gfr1(stem.string() + "_height.gfr", sub.height.values, pitch);
  });
  std::size_t total_clamped = 0;
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (clamped[i]) spdlog::warn("simulate: {} samples of tile {} clamped", clamped[i], index.tiles[i].name);
    total_clamped += clamped[i];
  }
  io::write_json(out / "tiles.json", to_json(index));
  write_provenance(out, "simulate", cfg, {{"clamped_samples", total_clamped}});
  spdlog::info("simulate: {} tiles written to {}", placements.size(), out.string());
}

/// Off-centre corrected, unnormalized gloss per tile.
inline void extract(const PipelineConfig& cfg, const fs::path& sim_dir, const fs::path& out, int jobs = 1) {
  const TileIndex index = read_tile_index(sim_dir);
  fs::create_directories(out);
  parallel_for(index.tiles.size(), jobs, [&](std::size_t i) {
    const auto& rec = index.tiles[i];
    const fs::path stem = sim_dir / "tiles" / rec.name;
    PolarizedPair pair{io::read_png_rgb16(stem.string() + "_p0.png"), io::read_png_rgb16(stem.string() + "_p90.png")};
    const ScannerConfig sc = cfg.scanner.with_footprint(pair.i1.width(), pair.i1.height(), index.pixel_pitch_um);
    write_gloss(out / (rec.name + "_gloss"), extract_gloss(pair, sc), index.pixel_pitch_um);
  });
  write_provenance(out, "extract", cfg);
  spdlog::info("extract: {} gloss maps", index.tiles.size());
}

inline MaskParams mask_params(const PipelineConfig& cfg) {
  return {deg_to_rad(cfg.mask.normal_deg), cfg.scanner.theta_mount, LightAzimuth::from_positive_x};
}

/// Normal and shadow masks, local-maximum infill, then one min-max scale
/// shared by all tiles.
inline void mask(const PipelineConfig& cfg, const fs::path& sim_dir, const fs::path& extract_dir,
                 const fs::path& out, int jobs = 1) {
  const TileIndex index = read_tile_index(sim_dir);
  fs::create_directories(out);
  std::vector<GlossMap> filled(index.tiles.size());
  std::vector<MaskStats> stats(index.tiles.size());
  parallel_for(index.tiles.size(), jobs, [&](std::size_t i) {
    const auto& rec = index.tiles[i];
    const HeightMap h = read_height(sim_dir / "tiles" / (rec.name + "_height.gfr"));
    const GlossMap g = read_gloss(extract_dir / (rec.name + "_gloss"));
    const MaskSet m = build_masks(h, mask_params(cfg));
    filled[i] = infill(g, m, cfg.mask.infill_radius);
    stats[i] = mask_stats(m);
    io::write_png_bitmap(out / (rec.name + "_normal.png"), m.normal_mask);
    io::write_png_bitmap(out / (rec.name + "_shadow.png"), m.shadow_mask);
    io::write_png_bitmap(out / (rec.name + "_mask.png"), m.combined);
  });
  const auto [lo, hi] = joint_range(filled);
  json summary = json::object();
  for (std::size_t i = 0; i < filled.size(); ++i) {
    const auto& rec = index.tiles[i];
    write_gloss(out / (rec.name + "_gloss"), normalize_gloss(filled[i], lo, hi), index.pixel_pitch_um);
    summary[rec.name] = {{"normal_pct", stats[i].normal_pct}, {"shadow_pct", stats[i].shadow_pct},
                         {"both_pct", stats[i].both_pct}};
  }
  io::write_json(out / "mask_stats.json", summary);
  write_provenance(out, "mask", cfg, {{"scale_min", lo}, {"scale_max", hi}});
  spdlog::info("mask: joint gloss range [{:.6g}, {:.6g}]", lo, hi);
}

inline void stitch(const PipelineConfig& cfg, const fs::path& sim_dir, const fs::path& mask_dir,
                   const fs::path& out) {
  const TileIndex index = read_tile_index(sim_dir);
  std::vector<std::vector<Tile>> grid(index.rows, std::vector<Tile>(index.cols));
  for (const auto& rec : index.tiles) {
    Tile t;
    t.color = io::read_png_rgb16(sim_dir / "tiles" / (rec.name + "_color.png"));
    t.height = read_height(sim_dir / "tiles" / (rec.name + "_height.gfr"));
    t.gloss = read_gloss(mask_dir / (rec.name + "_gloss"));
    t.grid_pos = rec.grid_pos;
    t.nominal_offset = rec.nominal;
    grid.at(rec.grid_pos.row).at(rec.grid_pos.col) = std::move(t);
  }
  const Mosaic m = glossforge::stitch(grid, cfg.stitch);
  fs::create_directories(out);
  io::write_png_rgb16(out / "mosaic_color.png", m.color);
  io::write_gfr1(out / "mosaic_height.gfr", m.height.values, m.height.pixel_pitch_um);
  write_gloss(out / "mosaic_gloss", m.gloss, m.height.pixel_pitch_um);
  io::write_png_bitmap(out / "coverage.png", m.coverage);

  json transforms = json::array(), regs = json::array();
  for (const auto& t : m.transforms)
    transforms.push_back({{"tile", tile_name(t.grid_pos)},
                          {"position", {t.position.dx, t.position.dy}},
                          {"height_plane", {t.height_correction.a, t.height_correction.b, t.height_correction.c}}});
  for (const auto& r : m.registrations)
    regs.push_back({{"a", tile_name(r.a)},
                    {"b", tile_name(r.b)},
                    {"offset", {r.result.offset.dx, r.result.offset.dy}},
                    {"cost", r.result.cost},
                    {"flat_cost", r.result.flat_cost}});
  io::write_json(out / "manifest.json", {{"width", m.color.width()},
                                         {"height", m.color.height()},
                                         {"rows", index.rows},
                                         {"cols", index.cols},
                                         {"transforms", transforms},
                                         {"registrations", regs},
                                         {"seam_max_gradient_mm", m.seam_max_gradient},
                                         {"tile_max_gradient_mm", m.tile_max_gradient}});
  write_provenance(out, "stitch", cfg);
  spdlog::info("stitch: mosaic {}x{}", m.color.width(), m.color.height());
}

inline GlossResponseCurve load_gloss_curve(const PipelineConfig& cfg) {
  if (cfg.fabrication.gloss_curve.empty()) return fit_gloss_curve(default_gloss_samples());
  return fit_gloss_curve(read_gloss_csv(cfg.fabrication.gloss_curve));
}

inline std::string color_layer_name(int layer) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "color_L%04d.png", layer);
  return buf;
}

inline std::string gloss_layer_name(int layer) { return "gloss_L" + std::to_string(layer) + ".png"; }

inline void write_print_job(const PrintJob& job, const fs::path& out) {
  fs::create_directories(out);
  const auto palette = io::ink_palette();
  std::vector<std::string> files;
  for (int l = 1; l <= job.color.layer_count; ++l) {
    files.push_back(color_layer_name(l));
    io::write_png_indexed(out / files.back(), job.color.layer_bitmap(l), palette);
  }
  for (int l = 1; l <= kGlossLayers; ++l) {
    files.push_back(gloss_layer_name(l));
    io::write_png_bitmap(out / files.back(), job.gloss_layers[l - 1]);
  }
  json sums = json::object();
  for (const auto& f : files) sums[f] = io::sha256_file(out / f);
  io::write_json(out / "manifest.json",
                 {{"dpi", job.dpi},
                  {"layer_thickness_um", job.layer_thickness_um},
                  {"width", job.print_values.width()},
                  {"height", job.print_values.height()},
                  {"counts", {{"color_layers", job.color.layer_count}, {"gloss_layers", kGlossLayers}}},
                  {"checksums", sums}});
}

/// Re-hashes every file listed in a print job manifest. Returns the names that
/// are missing or differ.
inline std::vector<std::string> verify_print_job(const fs::path& dir) {
  const json m = io::read_json(dir / "manifest.json");
  std::vector<std::string> bad;
  for (const auto& [name, sum] : m.at("checksums").items())
    if (!fs::exists(dir / name) || io::sha256_file(dir / name) != sum.get<std::string>()) bad.push_back(name);
  return bad;
}

inline void fabricate(const PipelineConfig& cfg, const fs::path& stitch_dir, const fs::path& out) {
  const ImageRgb color = io::read_png_rgb16(stitch_dir / "mosaic_color.png");
  const HeightMap height = read_height(stitch_dir / "mosaic_height.gfr");
  const GlossMap gloss = read_gloss(stitch_dir / "mosaic_gloss");
  const PrintJob job = make_print_job(color, height, gloss, load_gloss_curve(cfg), cfg.fabrication.layer_thickness_um,
                                      cfg.fabrication.dpi, cfg.seeds.dither);
  write_print_job(job, out);
  io::write_gfr1(out / "print_values.gfr", job.print_values, height.pixel_pitch_um);
  write_provenance(out, "fabricate", cfg);
  spdlog::info("fabricate: {} colour layers, {} gloss layers", job.color.layer_count, kGlossLayers);
}

// ---- evaluation ------------------------------------------------------------

/// The six pairs compared in a rotation study, as (minuend, subtrahend) scan indices.
inline const std::vector<std::pair<int, int>> kRotationPairs{{1, 0}, {2, 0}, {3, 0}, {1, 2}, {3, 2}, {3, 1}};

inline std::string pair_label(std::pair<int, int> p) {
  return "I" + std::to_string(90 * p.first) + "-I" + std::to_string(90 * p.second);
}

inline json to_json(const RegionStats& r) {
  return {{"count", r.count},       {"mean", r.mean},         {"std", r.std},
          {"abs_mean", r.abs_mean}, {"abs_std", r.abs_std},   {"abs_q1", r.abs_q1},
          {"abs_median", r.abs_median}, {"abs_q3", r.abs_q3}};
}

/// Compares four processed scans (directories holding gloss.gfr and mask.png,
/// taken at 0, 90, 180 and 270 degrees). Writes the report and one histogram
/// CSV per pair next to it.
inline json evaluate_scans(const std::vector<fs::path>& scans, const fs::path& report_path, int align_window = 8) {
  if (scans.size() != 4) throw DomainError("evaluate needs exactly four scans");
  std::vector<ImageF> maps;
  std::vector<Mask> masks;
  for (const auto& d : scans) {
    maps.push_back(io::read_gfr1(d / "gloss.gfr").values);
    masks.push_back(io::read_png_bitmap(d / "mask.png"));
  }
  const AlignedStack st = align_rotations(maps, {0, 1, 2, 3}, masks, align_window);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < st.maps.size(); ++k)
    for (std::size_t i = 0; i < st.maps[k].size(); ++i)
      if (st.valid[k].pixels()[i]) {
        lo = std::min(lo, st.maps[k].pixels()[i]);
        hi = std::max(hi, st.maps[k].pixels()[i]);
      }

  const fs::path dir = report_path.has_parent_path() ? report_path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  json pairs = json::array();
  for (const auto& pr : kRotationPairs) {
    Mask valid = st.valid[pr.first];
    for (std::size_t i = 0; i < valid.size(); ++i) valid.pixels()[i] &= st.valid[pr.second].pixels()[i];
    const auto r = difference_stats(st.maps[pr.first], st.maps[pr.second], st.masks[pr.first], st.masks[pr.second],
                                    lo, hi, &valid);
    const std::string label = pair_label(pr);
    std::string csv = "bin_lo,bin_hi,count,laplace_expected\n";
    const double n = static_cast<double>(r.all.count);
    for (std::size_t b = 0; b < r.histogram.counts.size(); ++b) {
      const double a = r.histogram.lo + b * r.histogram.bin_width, z = a + r.histogram.bin_width;
      auto cdf = [&](double x) {
        if (r.laplace_b <= 0.0) return x < r.laplace_mu ? 0.0 : 1.0;
        return x < r.laplace_mu ? 0.5 * std::exp((x - r.laplace_mu) / r.laplace_b)
                                : 1.0 - 0.5 * std::exp(-(x - r.laplace_mu) / r.laplace_b);
      };
      char line[128];
      std::snprintf(line, sizeof line, "%.1f,%.1f,%zu,%.6f\n", a, z, r.histogram.counts[b], n * (cdf(z) - cdf(a)));
      csv += line;
    }
    io::write_text(dir / ("hist_" + label + ".csv"), csv);
    pairs.push_back({{"pair", label},
                     {"mean_pct", r.mean},
                     {"std_pct", r.std},
                     {"laplace_mu_pct", r.laplace_mu},
                     {"laplace_b_pct", r.laplace_b},
                     {"all", to_json(r.all)},
                     {"masked", to_json(r.masked)},
                     {"unmasked", to_json(r.unmasked)},
                     {"histogram_csv", "hist_" + label + ".csv"}});
  }
  json offsets = json::array();
  for (const auto& o : st.offsets) offsets.push_back({o.dx, o.dy});
  json report = {{"joint_min", lo}, {"joint_max", hi}, {"alignment_offsets", offsets}, {"pairs", pairs}};
  io::write_json(report_path, report);
  return report;
}

/// Four full-painting captures at 0/90/180/270 degrees, each extracted, masked
/// and infilled, then compared.
inline void evaluate(const PipelineConfig& cfg, const fs::path& out, int jobs = 1) {
  const SyntheticScene scene = build_scene(cfg);
  std::vector<fs::path> dirs(4);
  parallel_for(4, jobs, [&](std::size_t k) {
    const SyntheticScene rs = rotate_scene(scene, static_cast<int>(k));
    RenderOptions opt = cfg.simulation.render;
    opt.noise_sigma = cfg.evaluation.noise_sigma;
    opt.noise_seed = rng::hash(cfg.seeds.noise, 1000 + k);
    const RenderResult res = render_pair(rs, opt);
    const GlossMap g = extract_gloss(res.pair, rs.config);
    const MaskSet m = build_masks(rs.height, mask_params(cfg));
    dirs[k] = out / ("scan_" + std::to_string(90 * k));
    fs::create_directories(dirs[k]);
    io::write_gfr1(dirs[k] / "gloss.gfr", infill(g, m, cfg.mask.infill_radius).values, rs.height.pixel_pitch_um);
    io::write_png_bitmap(dirs[k] / "mask.png", m.combined);
  });
  evaluate_scans(dirs, out / "report.json", cfg.evaluation.align_window);
  write_provenance(out, "evaluate", cfg);
  spdlog::info("evaluate: report written to {}", (out / "report.json").string());
}

// ---- orchestration ---------------------------------------------------------

/// Runs `fn`, translating library errors into a StageFailure naming the stage.
/// Missing inputs map to exit status 2, every other error to 1.
template <typename F>
void run_stage(const std::string& stage, F&& fn) {
  try {
    fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const MissingInput& e) {
    throw StageFailure(stage, e.what(), 2);
  } catch (const Error& e) {
    throw StageFailure(stage, e.what(), 1);
  } catch (const fs::filesystem_error& e) {
    throw StageFailure(stage, e.what(), 1);
  }
}

/// Stage outputs go to <root>/<stage>; later stages read earlier ones from there.
inline void run_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& stages, const fs::path& root,
                         int jobs = 1) {
  for (const auto& s : stages)
    if (std::find(kStages.begin(), kStages.end(), s) == kStages.end())
      throw StageFailure(s, "unknown stage", 1);
  run_stage("config", [&] {
    fs::create_directories(root);
    io::write_json(root / "config.json", to_json(cfg));
  });
  // Stages always run in pipeline order, whatever order they were listed in.
  for (const auto& s : kStages) {
    if (std::find(stages.begin(), stages.end(), s) == stages.end()) continue;
    spdlog::info("stage {}", s);
    run_stage(s, [&] {
      if (s == "simulate") simulate(cfg, root / "simulate", jobs);
      else if (s == "extract") extract(cfg, root / "simulate", root / "extract", jobs);
      else if (s == "mask") mask(cfg, root / "simulate", root / "extract", root / "mask", jobs);
      else if (s == "stitch") stitch(cfg, root / "simulate", root / "mask", root / "stitch");
      else if (s == "fabricate") fabricate(cfg, root / "stitch", root / "fabricate");
      else if (s == "evaluate") evaluate(cfg, root / "evaluate", jobs);
    });
  }
}

}  // namespace glossforge::pipeline
