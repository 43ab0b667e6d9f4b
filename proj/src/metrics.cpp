#include "canopysr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

#include "canopysr/numeric.hpp"

namespace canopysr {

const std::vector<double> kHeightBinEdges = {1.5,  5.0,  10.0, 15.0,
                                             20.0, 25.0, 30.0,
                                             std::numeric_limits<double>::infinity()};

BasicMetrics basic_metrics(const double* pred, const double* target,
                           const std::uint8_t* valid, std::size_t n) {
  std::size_t count = 0;
  double sum_abs = 0, sum_sq = 0, sum_y = 0, sum_ratio = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i])
      continue;
    const double e = pred[i] - target[i];
    sum_abs += std::abs(e);
    sum_sq += e * e;
    sum_y += target[i];
    sum_ratio += std::abs(e) / target[i];
    ++count;
  }
  if (count < 2)
    throw std::domain_error("basic_metrics needs at least 2 valid pixels");

  BasicMetrics m;
  m.mae = sum_abs / double(count);
  m.rmse = std::sqrt(sum_sq / double(count));
  m.rmae = sum_ratio / double(count);
  const double mean_y = sum_y / double(count);
  double ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i]) {
      const double d = target[i] - mean_y;
      ss_tot += d * d;
    }
  if (ss_tot > 0)
    m.r2 = 1.0 - sum_sq / ss_tot;
  return m;
}

std::vector<BinStat> bin_errors(const double* pred, const double* target,
                                const std::uint8_t* valid, std::size_t n) {
  const std::size_t nbins = kHeightBinEdges.size() - 1;
  std::vector<std::vector<double>> errors(nbins);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i])
      continue;
    ++total;
    for (std::size_t b = 0; b < nbins; ++b)
      if (target[i] >= kHeightBinEdges[b] && target[i] < kHeightBinEdges[b + 1]) {
        errors[b].push_back(pred[i] - target[i]);
        break;
      }
  }

  std::vector<BinStat> out(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    BinStat& s = out[b];
    s.lo = kHeightBinEdges[b];
    s.hi = kHeightBinEdges[b + 1];
    s.count = errors[b].size();
    s.fraction = total > 0 ? double(s.count) / double(total) : 0.0;
    if (s.count == 0)
      continue;
    auto& e = errors[b];
    std::sort(e.begin(), e.end());
    s.median = interpolated_percentile(e.begin(), e.end(), 0.5);
    s.q1 = interpolated_percentile(e.begin(), e.end(), 0.25);
    s.q3 = interpolated_percentile(e.begin(), e.end(), 0.75);
    const double iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * iqr;
    const double hi_fence = s.q3 + 1.5 * iqr;
    s.whisker_lo = *std::find_if(e.begin(), e.end(),
                                 [&](double v) { return v >= lo_fence; });
    s.whisker_hi = *std::find_if(e.rbegin(), e.rend(),
                                 [&](double v) { return v <= hi_fence; });
  }
  return out;
}

namespace {
// FFTW planning is not thread-safe; execution of a finished plan is.
std::mutex fftw_mutex;
} // namespace

FapProfile fap(const Tensor& img, int nbins) {
  if (img.ndim() != 2 || img.dim(0) != img.dim(1))
    throw std::invalid_argument("fap expects a square (H, H) image");
  const int n = int(img.dim(0));
  if (n < 8)
    throw std::invalid_argument("fap needs side >= 8");
  if (nbins < 1)
    throw std::invalid_argument("fap needs at least one bin");

  std::vector<std::complex<double>> in(std::size_t(n) * n), out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    in[i] = img[i];
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan plan = fftw_plan_dft_2d(
        n, n, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  std::vector<double> sums(nbins, 0.0);
  std::vector<std::size_t> counts(nbins, 0);
  for (int ky = 0; ky < n; ++ky) {
    const double fy = 2.0 * (ky <= n / 2 ? ky : ky - n) / n;
    for (int kx = 0; kx < n; ++kx) {
      const double fx = 2.0 * (kx <= n / 2 ? kx : kx - n) / n;
      const double f = std::sqrt(fx * fx + fy * fy);
      if (f > 1.0 + 1e-12)
        continue;
      int bin = f <= 0.0 ? 0 : int(std::ceil(f * nbins)) - 1;
      bin = std::clamp(bin, 0, nbins - 1);
      sums[bin] += std::abs(out[std::size_t(ky) * n + kx]);
      ++counts[bin];
    }
  }

  FapProfile prof;
  double anchor = 0.0;
  for (int b = 0; b < nbins; ++b) {
    if (counts[b] == 0)
      continue;
    const double mag = sums[b] / double(counts[b]);
    if (prof.magnitude.empty())
      anchor = std::max(mag, 1e-300);
    prof.freq.push_back((b + 0.5) / nbins);
    prof.magnitude.push_back(mag);
    prof.value.push_back(1.0 + std::log10(std::max(mag, 1e-300) / anchor));
  }
  return prof;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["mae"] = metrics.mae;
  j["rmse"] = metrics.rmse;
  j["rmae"] = metrics.rmae;
  if (metrics.r2)
    j["r2"] = *metrics.r2;
  else
    j["r2"] = nullptr;
  j["n_patches"] = n_patches;
  j["n_pixels"] = n_pixels;
  auto bins_json = nlohmann::json::array();
  for (const auto& b : bins) {
    nlohmann::json e;
    e["lo"] = b.lo;
    e["hi"] = std::isfinite(b.hi) ? nlohmann::json(b.hi) : nlohmann::json(nullptr);
    e["count"] = b.count;
    e["fraction"] = b.fraction;
    if (b.count > 0) {
      e["median"] = b.median;
      e["q1"] = b.q1;
      e["q3"] = b.q3;
      e["whisker_lo"] = b.whisker_lo;
      e["whisker_hi"] = b.whisker_hi;
    }
    bins_json.push_back(std::move(e));
  }
  j["bins"] = std::move(bins_json);
  auto fap_json = [](const FapProfile& p) {
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < p.freq.size(); ++i)
      arr.push_back({{"freq", p.freq[i]}, {"value", p.value[i]}});
    return arr;
  };
  j["fap_pred"] = fap_json(fap_pred);
  j["fap_reference"] = fap_json(fap_reference);
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "patches: " << n_patches << "  valid pixels: " << n_pixels << "\n";
  os << "MAE  " << metrics.mae << " m\n";
  os << "RMSE " << metrics.rmse << " m\n";
  if (metrics.r2)
    os << "R2   " << *metrics.r2 << "\n";
  else
    os << "R2   undefined (constant target)\n";
  os << "rMAE " << metrics.rmae << "\n\n";
  os << "height bin      count  fraction   median       q1       q3\n";
  for (const auto& b : bins) {
    std::ostringstream range;
    if (std::isfinite(b.hi))
      range << b.lo << "-" << b.hi << " m";
    else
      range << ">" << b.lo << " m";
    os << "  " << range.str();
    for (std::size_t pad = range.str().size(); pad < 12; ++pad)
      os << ' ';
    os << "  " << b.count << "  " << b.fraction;
    if (b.count > 0)
      os << "   " << b.median << "  " << b.q1 << "  " << b.q3;
    os << "\n";
  }
  return os.str();
}

} // namespace canopysr
