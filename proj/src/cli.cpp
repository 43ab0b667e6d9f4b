#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "canopysr/config.hpp"
#include "canopysr/encodings.hpp"
#include "canopysr/errors.hpp"
#include "canopysr/evalrun.hpp"
#include "canopysr/geotiff.hpp"
#include "canopysr/imageops.hpp"
#include "canopysr/inference.hpp"
#include "canopysr/svgplot.hpp"
#include "canopysr/synth.hpp"
#include "canopysr/trainer.hpp"

namespace fs = std::filesystem;
using namespace canopysr;

namespace {

RunConfig config_or_defaults(const std::string& path) {
  if (path.empty())
    return run_config_from_json(nlohmann::json::object());
  return load_run_config(path);
}

// "DD-MM" to day-of-year on the non-leap reference calendar.
int parse_date(const std::string& text) {
  int dd = 0, mm = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%d%c", &dd, &mm, &tail) != 2)
    throw ConfigError("cannot parse date '" + text + "', expected DD-MM");
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (mm < 1 || mm > 12 || dd < 1 || dd > days[mm - 1])
    throw ConfigError("'" + text + "' is not a calendar date (DD-MM)");
  return day_of_year(2021, mm, dd);
}

void require_manifest(const std::string& data_dir) {
  const fs::path manifest = fs::path(data_dir) / "manifest.txt";
  if (!fs::exists(manifest))
    throw ConfigError("no manifest.txt in '" + data_dir + "'");
}

std::vector<std::string> split_paths(const std::string& data_dir,
                                     const std::string& split) {
  require_manifest(data_dir);
  std::vector<std::string> paths;
  for (const ManifestEntry& e :
       read_manifest((fs::path(data_dir) / "manifest.txt").string()))
    if (e.split == split)
      paths.push_back(fs::path(e.path).is_absolute()
                          ? e.path
                          : (fs::path(data_dir) / e.path).string());
  if (paths.empty())
    throw ConfigError("manifest has no '" + split + "' patches");
  return paths;
}

PredictOptions options_for(const RunConfig& cfg, int tile, int margin) {
  PredictOptions opt;
  opt.tile = tile;
  opt.margin = margin;
  opt.t_max = cfg.data.sampler.t_max;
  opt.t_min = cfg.data.sampler.t_min;
  return opt;
}

int cmd_synth(const std::string& config_path, const std::string& out, int n,
              bool force) {
  const RunConfig cfg = config_or_defaults(config_path);
  if (fs::exists(out) && !fs::is_empty(out) && !force)
    throw ConfigError("'" + out + "' is not empty, pass --force to overwrite");
  if (n == 0)
    std::cerr << "warning: writing an empty dataset (--n 0)\n";
  const auto entries = write_synthetic_dataset(cfg.data.synth, n, out);
  std::cout << "wrote " << entries.size() << " patches to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data,
              const std::string& out, const std::string& resume) {
  const RunConfig cfg = load_run_config(config_path);
  require_manifest(data);
  Trainer trainer(cfg, data, out);
  if (!resume.empty())
    trainer.resume(resume);
  const TrainResult result = trainer.run();
  std::cout << "trained " << result.steps << " steps over " << result.epochs
            << " epochs";
  if (std::isfinite(result.best_val_mae))
    std::cout << ", best validation MAE " << result.best_val_mae << " m";
  std::cout << "\n";
  return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& data,
                 const std::string& out, const std::string& split, int tile,
                 int margin) {
  RunCheckpoint rc = load_run_checkpoint(ckpt);
  const auto paths = split_paths(data, split);
  const EvalReport report =
      evaluate_patches(rc.model, rc.stats, paths,
                       options_for(rc.config, tile, margin),
                       rc.config.eval.fap_bins);

  const fs::path reports = fs::path(out) / "reports";
  fs::create_directories(reports);
  {
    std::ofstream file(reports / "report.json");
    file << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream file(reports / "report.txt");
    file << report.to_text();
  }
  if (!report.fap_pred.freq.empty())
    write_line_chart((reports / "fap.svg").string(), "frequency attenuation",
                     "f / f_N", "1 + log10(M / M0)",
                     {{"prediction", "", report.fap_pred.freq,
                       report.fap_pred.value},
                      {"reference", "", report.fap_reference.freq,
                       report.fap_reference.value}});
  write_boxplot((reports / "bins.svg").string(), "error by target height",
                "prediction error (m)", report.bins);
  std::cout << report.to_text();
  return 0;
}

int cmd_predict(const std::string& ckpt, const std::string& patch_path,
                const std::string& out, const std::string& date, int tile,
                int margin, const std::string& upsample, int upsample_factor) {
  if (!upsample.empty() && upsample != "bicubic")
    throw ConfigError("unknown --upsample mode '" + upsample + "'");
  if (upsample_factor < 1)
    throw ConfigError("--upsample-factor must be >= 1");

  RunCheckpoint rc = load_run_checkpoint(ckpt);
  const PatchFile patch = load_patch(patch_path);
  PredictOptions opt = options_for(rc.config, tile, margin);
  opt.target_doy = parse_date(date);

  GeoRaster raster = predict_patch(rc.model, rc.stats, patch.sits, opt);
  if (upsample == "bicubic") {
    raster.values = bicubic_upsample(raster.values, upsample_factor);
    raster.geo.pixel_size /= upsample_factor;
  }
  if (!fs::path(out).parent_path().empty())
    fs::create_directories(fs::path(out).parent_path());
  write_geotiff(out, raster.values, raster.geo);
  std::cout << "wrote " << raster.values.dim(1) << "x" << raster.values.dim(0)
            << " raster at " << raster.geo.pixel_size << " m to " << out
            << "\n";
  return 0;
}

int cmd_fap(const std::string& a, const std::string& b,
            const std::string& reference, const std::string& out, int bins) {
  struct Named {
    std::string label;
    GeoRaster raster;
  };
  std::vector<Named> inputs;
  inputs.push_back({fs::path(a).stem().string(), read_geotiff(a)});
  inputs.push_back({fs::path(b).stem().string(), read_geotiff(b)});
  if (!reference.empty())
    inputs.push_back(
        {fs::path(reference).stem().string() + " (reference)",
         read_geotiff(reference)});

  std::vector<PlotSeries> series;
  std::vector<FapProfile> profiles;
  for (const Named& in : inputs) {
    const Tensor& v = in.raster.values;
    if (v.dim(0) != v.dim(1))
      throw ConfigError(in.label + " is " + std::to_string(v.dim(1)) + "x" +
                        std::to_string(v.dim(0)) +
                        ", not square; resample it to a square grid first");
    if (v.dim(0) < 8)
      throw ConfigError(in.label +
                        " is too small for a spectral profile (side >= 8)");
    profiles.push_back(fap(v, bins));
    series.push_back(
        {in.label, "", profiles.back().freq, profiles.back().value});
  }
  write_line_chart(out, "frequency attenuation", "f / f_N",
                   "1 + log10(M / M0)", series);

  fs::path table = out;
  table.replace_extension(".csv");
  std::ofstream file(table);
  file << "series,freq,value\n";
  for (std::size_t s = 0; s < series.size(); ++s)
    for (std::size_t k = 0; k < profiles[s].freq.size(); ++k)
      file << series[s].label << ',' << profiles[s].freq[k] << ','
           << profiles[s].value[k] << "\n";
  std::cout << "wrote " << out << " and " << table.string() << "\n";
  return 0;
}

} // namespace

int canopysr_main(const std::vector<std::string>& args) {
  CLI::App app{"canopy height regression and super-resolution from optical "
               "satellite time series"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, resume, checkpoint, patch_path;
  std::string split = "test", date = "01-07", upsample, raster_a, raster_b;
  std::string reference;
  int n = 8, tile = 0, margin = -1, upsample_factor = 4, bins = 32;
  bool force = false;

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic dataset with train/val/test manifest");
  synth->add_option("--config", config_path, "run config (JSON, optional)");
  synth->add_option("--out", out_dir, "dataset directory")->required();
  synth->add_option("--n", n, "number of patches (default 8)");
  synth->add_flag("--force", force, "overwrite a non-empty directory");

  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  train->add_option("--config", config_path, "run config (JSON)")->required();
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--out", out_dir, "run directory")->required();
  train->add_option("--resume", resume, "checkpoint to continue from");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "metrics, height-bin and spectral reports on a split");
  evaluate->add_option("--checkpoint", checkpoint, "trained model")
      ->required();
  evaluate->add_option("--data", data_dir, "dataset directory")->required();
  evaluate->add_option("--out", out_dir, "run directory for reports/")
      ->required();
  evaluate->add_option("--split", split, "manifest split (default test)");
  evaluate->add_option("--tile", tile, "tile side in input pixels, 0 = whole");
  evaluate->add_option("--margin", margin,
                       "tile context per side, default receptive radius");

  CLI::App* predict = app.add_subcommand(
      "predict", "height raster for one patch, any day of the year");
  predict->add_option("--checkpoint", checkpoint, "trained model")->required();
  predict->add_option("--patch", patch_path, "input patch file")->required();
  predict->add_option("--out", out_dir, "output GeoTIFF path")->required();
  predict->add_option("--date", date, "prediction date DD-MM (default 01-07)");
  predict->add_option("--tile", tile, "tile side in input pixels, 0 = whole");
  predict->add_option("--margin", margin,
                      "tile context per side, default receptive radius");
  predict->add_option("--upsample", upsample,
                      "post-process: 'bicubic' baseline upsampling");
  predict->add_option("--upsample-factor", upsample_factor,
                      "bicubic upsampling factor (default 4)");

  CLI::App* fapcmd = app.add_subcommand(
      "fap", "compare frequency attenuation profiles of two rasters");
  fapcmd->add_option("--a", raster_a, "first raster (GeoTIFF)")->required();
  fapcmd->add_option("--b", raster_b, "second raster (GeoTIFF)")->required();
  fapcmd->add_option("--reference", reference, "reference raster (optional)");
  fapcmd->add_option("--out", out_dir, "output figure (SVG)")->required();
  fapcmd->add_option("--bins", bins, "frequency bins (default 32)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(synth))
      return cmd_synth(config_path, out_dir, n, force);
    if (app.got_subcommand(train))
      return cmd_train(config_path, data_dir, out_dir, resume);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(checkpoint, data_dir, out_dir, split, tile, margin);
    if (app.got_subcommand(predict))
      return cmd_predict(checkpoint, patch_path, out_dir, date, tile, margin,
                         upsample, upsample_factor);
    if (app.got_subcommand(fapcmd))
      return cmd_fap(raster_a, raster_b, reference, out_dir, bins);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DateOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2; // unreachable with require_subcommand(1)
}
