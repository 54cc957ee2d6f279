// glossforge: command line front end of the gloss scanning and print pipeline.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "glossforge/glossforge.hpp"

namespace fs = std::filesystem;
namespace gf = glossforge;
namespace pl = glossforge::pipeline;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("glossforge");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("GLOSSFORGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept that when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("GLOSSFORGE_LOG: unknown level '{}'", env);
  }
}

/// A config file may hold a full pipeline config or only a scanner block.
gf::PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  const auto j = gf::io::read_json(path);
  if (j.is_object() && j.contains("theta_mount_rad")) {
    gf::PipelineConfig c;
    c.scanner = gf::scanner_from_json(j, path);
    return c;
  }
  return gf::pipeline_config_from_json(j);
}

void apply_seed(gf::PipelineConfig& c, std::uint64_t seed) {
  c.seeds = {seed, seed + 1, seed + 2, seed + 3};
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"glossforge: gloss capture, stitching and print preparation for paintings"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config_path, "pipeline or scanner JSON");
    auto* o = sub->add_option("--out", out, "output directory or file");
    if (needs_out) o->required();
    sub->add_option("--jobs", jobs, "parallel tiles")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_given = true; }, "base seed for scene, noise, jitter, dither");
  };

  // fresnel
  auto* fres = app.add_subcommand("fresnel", "Fresnel coefficients, Brewster angle and residual");
  std::vector<double> n2s{1.47, 1.495, 1.52};
  double n1 = 1.0;
  double theta_deg = gf::rad_to_deg(std::atan(1.495));
  fres->add_option("--n2", n2s, "refractive index of the paint (repeatable)");
  fres->add_option("--n1", n1, "ambient refractive index");
  fres->add_option("--theta-deg", theta_deg, "incidence angle in degrees");

  // geometry
  auto* geo = app.add_subcommand("geometry", "mirror angle and path length maps of one tile");
  add_common(geo, false);
  bool dump = false;
  int gw = 0, gh = 0;
  geo->add_flag("--dump", dump, "write theta.gfr and path_length.gfr to --out");
  geo->add_option("--width", gw, "raster width (default from the tile size and pitch)");
  geo->add_option("--height", gh, "raster height");

  // simulate
  auto* sim = app.add_subcommand("simulate", "render a synthetic scan");
  add_common(sim, true);
  std::string spec_path;
  sim->add_option("--spec", spec_path, "scene JSON");

  // extract
  auto* ext = app.add_subcommand("extract", "gloss maps from polarized pairs");
  add_common(ext, true);
  std::string in_dir;
  ext->add_option("--in", in_dir, "simulate output directory")->required();

  // mask
  auto* msk = app.add_subcommand("mask", "normal/shadow masks, infill and joint normalization");
  add_common(msk, true);
  std::string tiles_dir, gloss_dir;
  msk->add_option("--tiles", tiles_dir, "directory with tiles.json and tile heights")->required();
  msk->add_option("--gloss", gloss_dir, "extract output directory")->required();

  // stitch
  auto* sti = app.add_subcommand("stitch", "register and blend tiles into a mosaic");
  add_common(sti, true);
  std::string grid;
  double overlap = 0.3;
  sti->add_option("--tiles", tiles_dir, "directory with tiles.json, tile colour and height")->required();
  sti->add_option("--gloss", gloss_dir, "mask output directory (normalized gloss)")->required();
  sti->add_option("--grid", grid, "expected grid as RxC");
  sti->add_option("--overlap", overlap, "nominal overlap (informational; offsets come from tiles.json)");

  // fabricate
  auto* fab = app.add_subcommand("fabricate", "slice and dither a mosaic into a print job");
  add_common(fab, true);
  std::string curve_path;
  fab->add_option("--in", in_dir, "stitch output directory")->required();
  fab->add_option("--curve", curve_path, "gloss curve CSV (print_value,g60)");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "rotation consistency of four scans");
  add_common(eva, true);
  std::vector<std::string> scans;
  int window = 8;
  eva->add_option("--scans", scans, "scan directories at 0, 90, 180, 270 degrees")->expected(4)->required();
  eva->add_option("--align-window", window, "residual shift search radius in pixels");

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "run pipeline stages into one directory");
  add_common(pip, true);
  std::vector<std::string> stages = pl::kStages;
  pip->add_option("--stages", stages, "subset of: simulate extract mask stitch fabricate evaluate")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    gf::PipelineConfig cfg;
    pl::run_stage("config", [&] {
      cfg = load_config(config_path);
      if (seed_given) apply_seed(cfg, seed);
    });

    if (fres->parsed()) {
      for (double n2 : n2s) {
        const gf::OpticalMedium m{n1, n2};
        m.validate();
        const double th = gf::deg_to_rad(theta_deg);
        const auto c = gf::fresnel(th, m);
        nlohmann::json line = {{"n1", n1},
                               {"n2", n2},
                               {"theta_deg", theta_deg},
                               {"rs", c.rs},
                               {"rp", c.rp},
                               {"brewster_deg", gf::rad_to_deg(gf::brewster_angle(m))},
                               {"residual_pct", 100.0 * gf::unpolarized_residual(c)}};
        std::cout << line.dump() << "\n";
      }
    } else if (geo->parsed()) {
      pl::run_stage("geometry", [&] {
        const auto& sc = cfg.scanner;
        const int w = gw > 0 ? gw : sc.raster_width(), h = gh > 0 ? gh : sc.raster_height();
        const auto maps = gf::geometry_maps(sc, w, h);
        const auto [tmin, tmax] = gf::min_max(maps.theta);
        const auto [pmin, pmax] = gf::min_max(maps.path_length);
        std::cout << nlohmann::json{{"width", w},
                                    {"height", h},
                                    {"theta_min_deg", gf::rad_to_deg(tmin)},
                                    {"theta_max_deg", gf::rad_to_deg(tmax)},
                                    {"path_min_mm", pmin},
                                    {"path_max_mm", pmax}}
                         .dump()
                  << "\n";
        if (dump) {
          if (out.empty()) throw gf::DomainError("--dump needs --out");
          fs::create_directories(out);
          const double pitch = sc.tile_width_mm * 1000.0 / w;
          gf::io::write_gfr1(fs::path(out) / "theta.gfr", maps.theta, pitch);
          gf::io::write_gfr1(fs::path(out) / "path_length.gfr", maps.path_length, pitch);
        }
      });
    } else if (sim->parsed()) {
      pl::run_stage("simulate", [&] {
        if (!spec_path.empty()) cfg.simulation = gf::simulation_from_json(gf::io::read_json(spec_path), spec_path);
        pl::simulate(cfg, out, jobs);
      });
    } else if (ext->parsed()) {
      pl::run_stage("extract", [&] { pl::extract(cfg, in_dir, out, jobs); });
    } else if (msk->parsed()) {
      pl::run_stage("mask", [&] { pl::mask(cfg, tiles_dir, gloss_dir, out, jobs); });
    } else if (sti->parsed()) {
      pl::run_stage("stitch", [&] {
        if (!grid.empty()) {
          const auto index = pl::read_tile_index(tiles_dir);
          const std::string actual = std::to_string(index.rows) + "x" + std::to_string(index.cols);
          if (grid != actual) throw gf::DomainError("--grid " + grid + " does not match tiles.json (" + actual + ")");
        }
        if (!(overlap >= 0.0 && overlap < 1.0)) throw gf::DomainError("--overlap must lie in [0, 1)");
        pl::stitch(cfg, tiles_dir, gloss_dir, out);
      });
    } else if (fab->parsed()) {
      pl::run_stage("fabricate", [&] {
        if (!curve_path.empty()) cfg.fabrication.gloss_curve = curve_path;
        pl::fabricate(cfg, in_dir, out);
      });
    } else if (eva->parsed()) {
      pl::run_stage("evaluate", [&] {
        std::vector<fs::path> dirs(scans.begin(), scans.end());
        const auto report = pl::evaluate_scans(dirs, out, window);
        for (const auto& p : report.at("pairs"))
          std::cout << p.at("pair").get<std::string>() << " mean " << p.at("mean_pct").get<double>() << "% std "
                    << p.at("std_pct").get<double>() << "%\n";
      });
    } else if (pip->parsed()) {
      pl::run_pipeline(cfg, stages, out, jobs);
    }
  } catch (const pl::StageFailure& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const gf::Error& e) {
    spdlog::error("{}: {}", stage, e.what());
    return 1;
  }
  return 0;
}
