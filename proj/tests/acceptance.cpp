// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Each check is self-contained and rebuilds its inputs from fixed
// seeds, so a line's verdict can be reproduced in isolation.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "canopysr/config.hpp"
#include "canopysr/imageops.hpp"
#include "canopysr/inference.hpp"
#include "canopysr/kernels.hpp"
#include "canopysr/losses.hpp"
#include "canopysr/metrics.hpp"
#include "canopysr/model.hpp"
#include "canopysr/rasterize.hpp"
#include "canopysr/rng.hpp"
#include "canopysr/synth.hpp"
#include "canopysr/trainer.hpp"

namespace fs = std::filesystem;
using namespace canopysr;

namespace {

int failures = 0;

void run_criterion(int num, const std::string& name,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << num << ": " << name;
  if (!detail.empty())
    std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok)
    ++failures;
}

// ---------------------------------------------------------------- shared ---

// Loss-check batch: checkerboard values keep residuals and gradient
// magnitudes away from the |x| kinks; exactly 40% of each patch is masked.
struct LossBatch {
  Tensor pred, target;
  std::vector<std::uint8_t> valid;
};

LossBatch make_batch(std::uint64_t seed, int b, int h, int w) {
  auto rng = make_rng(seed);
  LossBatch out;
  out.pred = Tensor({std::size_t(b), std::size_t(h), std::size_t(w)});
  out.target = Tensor({std::size_t(b), std::size_t(h), std::size_t(w)});
  out.valid.assign(std::size_t(b) * h * w, 1);
  for (int i = 0; i < b; ++i) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int parity = (y + x) % 2;
        out.pred.at(i, y, x) = 1.0 + 0.3 * parity + 0.05 * uniform(rng, -1, 1);
        out.target.at(i, y, x) = 3.0 + 0.8 * parity + 0.05 * uniform(rng, -1, 1);
      }
    std::vector<std::size_t> order(std::size_t(h) * w);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < order.size() * 2 / 5; ++k)
      out.valid[std::size_t(i) * h * w + order[k]] = 0;
  }
  return out;
}

double central_diff(const std::function<double(const Tensor&)>& f, Tensor pred,
                    std::size_t idx, double step) {
  const double saved = pred[idx];
  pred[idx] = saved + step;
  const double up = f(pred);
  pred[idx] = saved - step;
  const double down = f(pred);
  return (up - down) / (2 * step);
}

ModelConfig tiny_model(int factor) {
  ModelConfig cfg;
  cfg.f1 = 8;
  cfg.growth = 4;
  cfg.n_blocks = 2;
  cfg.layers_per_block = 2;
  cfg.heads = 2;
  cfg.d_attn = 4;
  cfg.f2 = 8;
  cfg.factor = factor;
  cfg.mlp_hidden1 = 8;
  cfg.mlp_hidden2 = 8;
  return cfg;
}

Tensor random_series(Rng& rng, int t, int side) {
  Tensor x({std::size_t(t), std::size_t(kInputChannels), std::size_t(side),
            std::size_t(side)});
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = uniform(rng, -1, 1);
  return x;
}

std::vector<double> random_offsets(Rng& rng, int t) {
  std::vector<double> offsets(std::size_t(t));
  for (double& o : offsets)
    o = std::floor(uniform(rng, 0, 365));
  return offsets;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Literal rank-interpolation percentile, the oracle's own copy.
double oracle_percentile(std::vector<double> sorted, double q) {
  const double rank = double(sorted.size() - 1) * q;
  const std::size_t lo = std::size_t(std::floor(rank));
  const double frac = rank - double(lo);
  if (lo + 1 >= sorted.size())
    return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// ------------------------------------------------------------- criteria ---

bool c1_gradients(std::string& detail) {
  const auto started = std::chrono::steady_clock::now();
  const double step = 1e-5;
  double worst = 0.0;

  struct Family {
    std::string name;
    std::function<double(const LossBatch&, Tensor*)> eval;
  };
  std::vector<Family> families;
  families.push_back({"patch_balanced_mae", [](const LossBatch& b, Tensor* d) {
                        return patch_balanced_mae(b.pred, b.target, b.valid, d);
                      }});
  for (const double lambda_min : {0.1, 1.0})
    for (const int exponent : {1, 2})
      families.push_back(
          {"wgdl", [lambda_min, exponent](const LossBatch& b, Tensor* d) {
             return wgdl(b.pred, b.target, b.valid, lambda_min, exponent, d);
           }});
  families.push_back({"total_loss", [](const LossBatch& b, Tensor* d) {
                        return total_loss(b.pred, b.target, b.valid,
                                          LossConfig{}, d)
                            .total;
                      }});

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    LossBatch batch = make_batch(seed, 2, 12, 12);
    const std::size_t masked = std::count(batch.valid.begin(),
                                          batch.valid.end(), std::uint8_t(0));
    if (masked * 10 < batch.valid.size() * 3) {
      detail = "batch below 30% masked";
      return false;
    }
    for (const Family& family : families) {
      Tensor dpred;
      family.eval(batch, &dpred);
      auto f = [&](const Tensor& p) {
        LossBatch moved = batch;
        moved.pred = p;
        return family.eval(moved, nullptr);
      };
      for (std::size_t i = 0; i < dpred.size(); ++i) {
        const double num = central_diff(f, batch.pred, i, step);
        const double denom =
            std::max({std::abs(num), std::abs(dpred[i]), 1e-6});
        worst = std::max(worst, std::abs(dpred[i] - num) / denom);
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::ostringstream s;
  s << "max rel err " << worst << ", " << seconds << " s";
  detail = s.str();
  return worst < 1e-4 && seconds < 60.0;
}

bool c2_masking(std::string& detail) {
  auto rng = make_rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    LossBatch batch = make_batch(1000 + std::uint64_t(trial), 2, 10, 10);
    std::vector<std::size_t> invalid;
    for (std::size_t i = 0; i < batch.valid.size(); ++i)
      if (!batch.valid[i])
        invalid.push_back(i);
    const std::size_t idx =
        invalid[std::size_t(uniform_int(rng, 0, int(invalid.size()) - 1))];

    const LossValue before =
        total_loss(batch.pred, batch.target, batch.valid, LossConfig{});
    batch.pred[idx] += uniform(rng, -50, 50);
    batch.target[idx] += uniform(rng, -50, 50);
    const LossValue after =
        total_loss(batch.pred, batch.target, batch.valid, LossConfig{});
    if (before.total != after.total || before.height != after.height ||
        before.wgdl != after.wgdl) {
      detail = "trial " + std::to_string(trial) + " changed the loss";
      return false;
    }
  }
  return true;
}

bool c3_attention(std::string& detail) {
  Model model(tiny_model(1), 17);
  auto rng = make_rng(18);
  const int t = 6, side = 5;
  const Tensor x = random_series(rng, t, side);
  const std::vector<double> offsets = random_offsets(rng, t);
  const std::vector<std::uint8_t> valid = {1, 0, 1, 1, 0, 1};

  const Tensor out = model.forward(x, offsets, 0.0, valid);
  const Tensor attn = model.attention();
  const std::vector<int> kept = model.kept_timesteps();

  if (kept != std::vector<int>{0, 2, 3, 5} ||
      attn.dim(1) != kept.size()) {
    detail = "padded timesteps were not excluded";
    return false;
  }
  const std::size_t heads = attn.dim(0);
  const std::size_t plane = attn.dim(2) * attn.dim(3);
  for (std::size_t hd = 0; hd < heads; ++hd)
    for (std::size_t p = 0; p < plane; ++p) {
      double sum = 0;
      for (std::size_t k = 0; k < kept.size(); ++k)
        sum += attn.data()[(hd * kept.size() + k) * plane + p];
      if (std::abs(sum - 1.0) > 1e-6) {
        detail = "attention weights do not sum to 1";
        return false;
      }
    }

  // identical series with the padding physically removed
  Tensor trimmed({kept.size(), std::size_t(kInputChannels),
                  std::size_t(side), std::size_t(side)});
  std::vector<double> trimmed_offsets;
  const std::size_t row = std::size_t(kInputChannels) * side * side;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    std::copy_n(x.data() + std::size_t(kept[k]) * row, row,
                trimmed.data() + k * row);
    trimmed_offsets.push_back(offsets[std::size_t(kept[k])]);
  }
  const Tensor out_trimmed =
      model.forward(trimmed, trimmed_offsets, 0.0,
                    std::vector<std::uint8_t>(kept.size(), 1));
  double pad_diff = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    pad_diff = std::max(pad_diff, std::abs(out[i] - out_trimmed[i]));

  // joint permutation of timesteps, offsets and the mask
  std::vector<int> perm(std::size_t(t));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Tensor xp(x.shape());
  std::vector<double> op(std::size_t(t));
  std::vector<std::uint8_t> vp(std::size_t(t));
  for (int i = 0; i < t; ++i) {
    std::copy_n(x.data() + std::size_t(perm[std::size_t(i)]) * row, row,
                xp.data() + std::size_t(i) * row);
    op[std::size_t(i)] = offsets[std::size_t(perm[std::size_t(i)])];
    vp[std::size_t(i)] = valid[std::size_t(perm[std::size_t(i)])];
  }
  const Tensor out_perm = model.forward(xp, op, 0.0, vp);
  double perm_diff = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    perm_diff = std::max(perm_diff, std::abs(out[i] - out_perm[i]));

  std::ostringstream s;
  s << "padding diff " << pad_diff << ", permutation diff " << perm_diff;
  detail = s.str();
  return pad_diff <= 1e-6 && perm_diff <= 1e-6;
}

bool c4_pixel_shuffle(std::string& detail) {
  auto rng = make_rng(44);
  for (const int r : {2, 4})
    for (int trial = 0; trial < 10; ++trial) {
      const int c = uniform_int(rng, 1, 4);
      const int h = uniform_int(rng, 1, 8);
      const int w = uniform_int(rng, 1, 8);
      std::vector<double> x(std::size_t(c) * r * r * h * w);
      for (double& v : x)
        v = uniform(rng, -10, 10);
      std::vector<double> y(x.size()), back(x.size());
      kernels::pixel_shuffle(x.data(), y.data(), c, r, h, w);
      kernels::pixel_unshuffle(y.data(), back.data(), c, r, h, w);
      if (back != x) {
        detail = "unshuffle(shuffle(x)) != x";
        return false;
      }
      std::vector<double> again(x.size());
      kernels::pixel_unshuffle(y.data(), x.data(), c, r, h, w);
      kernels::pixel_shuffle(x.data(), again.data(), c, r, h, w);
      if (again != y) {
        detail = "shuffle(unshuffle(y)) != y";
        return false;
      }
    }
  return true;
}

bool c5_init(std::string& detail) {
  double worst = 0.0;
  for (const int r : {2, 4}) {
    ModelConfig cfg = tiny_model(r);
    cfg.init_noise = 0.0;
    Model model(cfg, 5);
    auto rng = make_rng(std::uint64_t(50 + r));
    for (int trial = 0; trial < 10; ++trial) {
      const int side = 8;
      const Tensor x = random_series(rng, 5, side);
      const Tensor out = model.forward(x, random_offsets(rng, 5), 0.0,
                                       std::vector<std::uint8_t>(5, 1));
      for (int by = 0; by < side; ++by)
        for (int bx = 0; bx < side; ++bx) {
          double lo = out.at(std::size_t(by) * r, std::size_t(bx) * r);
          double hi = lo;
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
              const double v = out.at(std::size_t(by * r + i),
                                      std::size_t(bx * r + j));
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            }
          const double mid = (std::abs(lo) + std::abs(hi)) / 2;
          worst = std::max(worst, (hi - lo) / std::max(mid, 1e-9));
        }
    }
  }
  std::ostringstream s;
  s << "worst in-block relative spread " << worst;
  detail = s.str();
  return worst <= 1e-6;
}

bool c6_overfit(std::string& detail) {
  const auto started = std::chrono::steady_clock::now();
  const RunConfig cfg = run_config_from_json(nlohmann::json::parse(R"({
    "data": {
      "resolution": 2.5, "window": 12, "margin": 2, "t_max": 5, "t_min": 5,
      "windows_per_patch": 8,
      "synth": {"scene_size": 24, "ref_border": 4, "n_images": 6, "seed": 11,
                "radius_jitter": 0, "cloud_prob": 0, "noise": 0.002,
                "crop_parcels": 0}
    },
    "model": {"f1": 32, "growth": 16, "n_blocks": 3, "layers_per_block": 3,
              "heads": 2, "d_attn": 8, "f2": 32, "mlp_hidden1": 64,
              "mlp_hidden2": 32},
    "train": {"batch_size": 2, "accum_steps": 1, "lr": 0.001,
              "max_steps": 1100, "max_epochs": 100000, "cycle_epochs": 63,
              "patience": 0, "seed": 5}
  })"));

  const fs::path data_dir = fresh_dir("canopysr_acceptance_data");
  write_synthetic_dataset(cfg.data.synth, 8, data_dir.string());
  Trainer trainer(cfg, data_dir.string(),
                  fresh_dir("canopysr_acceptance_run").string());
  const TrainResult result = trainer.run();
  const double mae = trainer.train_stats().mae;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  std::ostringstream s;
  s << "train masked MAE " << mae << " m after " << result.steps << " steps, "
    << int(seconds) << " s";
  detail = s.str();
  return mae < 0.5 && result.steps <= 2000 && seconds < 1200.0;
}

bool c7_oracles(std::string& detail) {
  auto rng = make_rng(31);
  const std::size_t n = 10000;
  std::vector<double> pred(n), target(n);
  std::vector<std::uint8_t> valid(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = uniform(rng, 0, 35);
    target[i] = uniform(rng, 1.6, 30);
    valid[i] = uniform(rng, 0, 1) < 0.7;
  }

  // literal-formula oracle for the pixel metrics
  double sum_abs = 0, sum_sq = 0, sum_ratio = 0, sum_y = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i]) {
      sum_abs += std::abs(pred[i] - target[i]);
      sum_sq += (pred[i] - target[i]) * (pred[i] - target[i]);
      sum_ratio += std::abs(pred[i] - target[i]) / target[i];
      sum_y += target[i];
      ++count;
    }
  double ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i])
      ss_tot += (target[i] - sum_y / double(count)) *
                (target[i] - sum_y / double(count));

  const BasicMetrics m = basic_metrics(pred.data(), target.data(),
                                       valid.data(), n);
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
  };
  if (!close(m.mae, sum_abs / double(count)) ||
      !close(m.rmse, std::sqrt(sum_sq / double(count))) ||
      !close(m.rmae, sum_ratio / double(count)) || !m.r2.has_value() ||
      !close(*m.r2, 1.0 - sum_sq / ss_tot)) {
    detail = "basic_metrics deviates from the literal formulas";
    return false;
  }

  // sort oracle for the height bins
  const std::vector<BinStat> bins =
      bin_errors(pred.data(), target.data(), valid.data(), n);
  std::size_t total_binned = 0;
  for (std::size_t b = 0; b + 1 < kHeightBinEdges.size(); ++b) {
    std::vector<double> errors;
    for (std::size_t i = 0; i < n; ++i)
      if (valid[i] && target[i] >= kHeightBinEdges[b] &&
          target[i] < kHeightBinEdges[b + 1])
        errors.push_back(pred[i] - target[i]);
    total_binned += errors.size();
    std::sort(errors.begin(), errors.end());
    const BinStat& s = bins[b];
    if (s.count != errors.size()) {
      detail = "bin count mismatch";
      return false;
    }
    if (errors.empty())
      continue;
    const double q1 = oracle_percentile(errors, 0.25);
    const double q3 = oracle_percentile(errors, 0.75);
    double w_lo = errors.back(), w_hi = errors.front();
    for (const double e : errors)
      if (e >= q1 - 1.5 * (q3 - q1)) {
        w_lo = e;
        break;
      }
    for (auto it = errors.rbegin(); it != errors.rend(); ++it)
      if (*it <= q3 + 1.5 * (q3 - q1)) {
        w_hi = *it;
        break;
      }
    if (!close(s.median, oracle_percentile(errors, 0.5)) ||
        !close(s.q1, q1) || !close(s.q3, q3) ||
        !close(s.fraction, double(errors.size()) / double(count)) ||
        !close(s.whisker_lo, w_lo) || !close(s.whisker_hi, w_hi)) {
      detail = "bin statistics deviate from the sort oracle";
      return false;
    }
  }
  (void)total_binned;

  // brute-force percentile oracle for the point-cloud gridding
  const double res = 2.5;
  const Extent extent{100.0, 200.0, 100.0 + 8 * res, 200.0 + 6 * res};
  PointCloudSample cloud;
  cloud.crop_parcels.push_back(Polygon{{{103.3, 203.7},
                                        {108.9, 203.7},
                                        {108.9, 209.1},
                                        {103.3, 209.1}}});
  for (int i = 0; i < 3000; ++i) {
    ClassedPoint p;
    p.x = uniform(rng, extent.min_x, extent.max_x);
    p.y = uniform(rng, extent.min_y, extent.max_y);
    p.z = uniform(rng, 0, 30);
    const double u = uniform(rng, 0, 1);
    p.cls = u < 0.7   ? PointClass::vegetation
            : u < 0.85 ? PointClass::ground
            : u < 0.95 ? PointClass::building
                       : PointClass::other;
    cloud.points.push_back(p);
  }
  const ReferenceRaster raster = rasterize_p95(cloud, res, extent);
  for (int row = 0; row < 6; ++row)
    for (int col = 0; col < 8; ++col) {
      std::vector<double> zs;
      for (const ClassedPoint& p : cloud.points)
        if (p.cls == PointClass::vegetation &&
            p.x >= extent.min_x + col * res &&
            p.x < extent.min_x + (col + 1) * res &&
            p.y <= extent.max_y - row * res &&
            p.y > extent.max_y - (row + 1) * res)
          zs.push_back(p.z);
      double expected = 0;
      bool expect_valid = false;
      if (!zs.empty()) {
        std::sort(zs.begin(), zs.end());
        const double p95 = oracle_percentile(zs, 0.95);
        const double cx = extent.min_x + (col + 0.5) * res;
        const double cy = extent.max_y - (row + 0.5) * res;
        const bool in_parcel = cx > 103.3 && cx < 108.9 && cy > 203.7 &&
                               cy < 209.1;
        if (p95 >= 1.5 && !(p95 < 5.0 && in_parcel)) {
          expected = p95;
          expect_valid = true;
        }
      }
      const std::size_t i = std::size_t(row) * 8 + std::size_t(col);
      if (raster.heights.data()[i] != expected ||
          (raster.valid_mask[i] != 0) != expect_valid) {
        detail = "pixel (" + std::to_string(row) + "," + std::to_string(col) +
                 ") deviates from the brute-force oracle";
        return false;
      }
    }
  return true;
}

bool c8_fap(std::string& detail) {
  SynthConfig scfg;
  scfg.seed = 77;
  const PatchFile patch = generate_synthetic(scfg);
  const Tensor& img = patch.reference.heights;

  const FapProfile original = fap(img);
  const FapProfile repeat = fap(img);
  if (original.freq != repeat.freq || original.value != repeat.value ||
      original.magnitude != repeat.magnitude) {
    detail = "identical inputs gave different profiles";
    return false;
  }

  const Tensor rebuilt = bicubic_upsample(box_downsample2(img), 2);
  const FapProfile degraded = fap(rebuilt);
  if (degraded.freq != original.freq) {
    detail = "profiles have different bins";
    return false;
  }
  for (std::size_t k = 0; k < original.freq.size(); ++k)
    if (original.freq[k] > 0.5 &&
        degraded.value[k] > original.value[k] + 1e-12) {
      std::ostringstream s;
      s << "bin at f/f_N = " << original.freq[k] << " gained energy";
      detail = s.str();
      return false;
    }
  return true;
}

bool c9_schedule(std::string& detail) {
  const int cycle_len = 240;
  const double lr0 = lr_schedule(0, cycle_len, 1, 1e-3, 0.25, 0.0);
  const double lr1 = lr_schedule(cycle_len, cycle_len, 1, 1e-3, 0.25, 0.0);
  std::ostringstream s;
  s << "step 0 lr " << lr0 << ", cycle 1 peak " << lr1;
  detail = s.str();
  return lr0 == 1e-3 && lr1 == 2.5e-4;
}

bool c10_tiling(std::string& detail) {
  SynthConfig scfg;
  scfg.scene_size = 20;
  scfg.ref_border = 4;
  scfg.n_images = 6;
  scfg.seed = 21;
  const PatchFile patch = generate_synthetic(scfg);

  ModelConfig mcfg = tiny_model(4);
  mcfg.f1 = 16;
  mcfg.growth = 8;
  mcfg.f2 = 12;
  mcfg.d_attn = 8;
  Model model(mcfg, 9);
  ChannelStats stats;
  stats.mean.fill(0.12);
  stats.stddev.fill(0.05);

  PredictOptions opt;
  opt.t_max = 5;
  opt.t_min = 5;
  const GeoRaster whole = predict_patch(model, stats, patch.sits, opt);
  opt.tile = 7;
  const GeoRaster tiled = predict_patch(model, stats, patch.sits, opt);

  double diff = 0;
  for (std::size_t i = 0; i < whole.values.size(); ++i)
    diff = std::max(diff,
                    std::abs(whole.values.data()[i] - tiled.values.data()[i]));
  std::ostringstream s;
  s << "max abs difference " << diff << " m";
  detail = s.str();
  return diff < 1e-4;
}

bool c11_audit(std::string& detail) {
  const nlohmann::json frozen = nlohmann::json::parse(R"({
    "per_resolution": {
      "10":  {"factor": 1, "n_blocks": 4, "layers_per_block": 4},
      "5":   {"factor": 2, "n_blocks": 5, "layers_per_block": 5},
      "2.5": {"factor": 4, "n_blocks": 5, "layers_per_block": 5}
    },
    "model": {"f1": 64, "f2": 64, "growth": 24, "heads": 4, "d_attn": 16,
              "tau": 365.0, "mlp_hidden1": 128, "mlp_hidden2": 64},
    "data": {"t_max": 12, "t_min": 5, "window": 64},
    "effective_batch": 128
  })");

  for (const auto& [res_text, expected] :
       frozen.at("per_resolution").items()) {
    const RunConfig cfg = RunConfig::defaults(std::stod(res_text));
    const nlohmann::json dump = run_config_to_json(cfg);
    for (const auto& [key, value] : expected.items())
      if (dump.at("model").at(key) != value) {
        detail = res_text + " m: model." + key + " is " +
                 dump.at("model").at(key).dump() + ", expected " +
                 value.dump();
        return false;
      }
    for (const auto& [key, value] : frozen.at("model").items())
      if (dump.at("model").at(key) != value) {
        detail = res_text + " m: model." + key + " is " +
                 dump.at("model").at(key).dump() + ", expected " +
                 value.dump();
        return false;
      }
    for (const auto& [key, value] : frozen.at("data").items())
      if (dump.at("data").at(key) != value) {
        detail = res_text + " m: data." + key + " is " +
                 dump.at("data").at(key).dump() + ", expected " + value.dump();
        return false;
      }
    const int effective = dump.at("train").at("batch_size").get<int>() *
                          dump.at("train").at("accum_steps").get<int>();
    if (effective != frozen.at("effective_batch").get<int>()) {
      detail = res_text + " m: effective batch is " +
               std::to_string(effective);
      return false;
    }
  }
  return true;
}

} // namespace

int main() {
  run_criterion(1, "loss gradients match central finite differences",
                c1_gradients);
  run_criterion(2, "invalid pixels are exactly inert", c2_masking);
  run_criterion(3, "attention normalization, padding and permutation",
                c3_attention);
  run_criterion(4, "pixel shuffle and its inverse are a bijection",
                c4_pixel_shuffle);
  run_criterion(5, "zero-noise init gives block-constant upsampling",
                c5_init);
  run_criterion(6, "overfit demonstration on synthetic patches", c6_overfit);
  run_criterion(7, "metrics and gridding match independent oracles",
                c7_oracles);
  run_criterion(8, "downsampling attenuates the upper frequency bins",
                c8_fap);
  run_criterion(9, "schedule hits the configured peaks exactly", c9_schedule);
  run_criterion(10, "tiled and whole-patch inference agree", c10_tiling);
  run_criterion(11, "resolution presets match the frozen table", c11_audit);

  if (failures == 0)
    std::cout << "all criteria passed" << std::endl;
  else
    std::cout << failures << " criteria failed" << std::endl;
  return failures;
}
