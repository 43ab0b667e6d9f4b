#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "canopysr/imageops.hpp"
#include "canopysr/metrics.hpp"
#include "canopysr/rng.hpp"

using namespace canopysr;

namespace {

// Literal restatement of the percentile formula, kept independent of the
// library helper.
double oracle_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double rank = (double(v.size()) - 1) * q;
  const std::size_t lo = std::size_t(rank);
  const double frac = rank - double(lo);
  if (lo + 1 >= v.size())
    return v.back();
  return v[lo] * (1 - frac) + v[lo + 1] * frac;
}

Tensor noise_image(std::uint64_t seed, int n) {
  auto rng = make_rng(seed);
  Tensor img({std::size_t(n), std::size_t(n)});
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = normal(rng);
  return img;
}

} // namespace

TEST_CASE("basic_metrics handles the degenerate cases") {
  std::vector<double> target = {2.0, 4.0, 8.0, 16.0};
  std::vector<std::uint8_t> valid(4, 1);

  const BasicMetrics perfect =
      basic_metrics(target.data(), target.data(), valid.data(), 4);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.rmae == 0.0);
  REQUIRE(perfect.r2.has_value());
  CHECK(*perfect.r2 == 1.0);

  // Predicting the target mean gives R^2 = 0.
  const double mean = (2 + 4 + 8 + 16) / 4.0;
  std::vector<double> pred(4, mean);
  const BasicMetrics flat = basic_metrics(pred.data(), target.data(), valid.data(), 4);
  REQUIRE(flat.r2.has_value());
  CHECK(*flat.r2 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // Constant target: R^2 undefined.
  std::vector<double> const_t(4, 5.0);
  const BasicMetrics undef = basic_metrics(pred.data(), const_t.data(), valid.data(), 4);
  CHECK(!undef.r2.has_value());

  std::vector<std::uint8_t> one_valid = {1, 0, 0, 0};
  CHECK_THROWS_AS(basic_metrics(pred.data(), target.data(), one_valid.data(), 4),
                  std::domain_error);
}

TEST_CASE("basic_metrics matches a literal-formula oracle on large vectors") {
  auto rng = make_rng(41);
  const std::size_t n = 10000;
  std::vector<double> pred(n), target(n);
  std::vector<std::uint8_t> valid(n);
  for (std::size_t i = 0; i < n; ++i) {
    target[i] = uniform(rng, 1.5, 40.0);
    pred[i] = target[i] + normal(rng, 0, 3);
    valid[i] = uniform(rng, 0, 1) < 0.8 ? 1 : 0;
  }
  const BasicMetrics m = basic_metrics(pred.data(), target.data(), valid.data(), n);

  double sum_abs = 0, sum_sq = 0, sum_y = 0, sum_ratio = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i]) {
      sum_abs += std::abs(pred[i] - target[i]);
      sum_sq += (pred[i] - target[i]) * (pred[i] - target[i]);
      sum_y += target[i];
      sum_ratio += std::abs(pred[i] - target[i]) / target[i];
      ++count;
    }
  double ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i])
      ss_tot += (target[i] - sum_y / count) * (target[i] - sum_y / count);

  CHECK(std::abs(m.mae - sum_abs / count) < 1e-9);
  CHECK(std::abs(m.rmse - std::sqrt(sum_sq / count)) < 1e-9);
  CHECK(std::abs(m.rmae - sum_ratio / count) < 1e-9);
  REQUIRE(m.r2.has_value());
  CHECK(std::abs(*m.r2 - (1.0 - sum_sq / ss_tot)) < 1e-9);
  CHECK(m.mae <= m.rmse);
}

TEST_CASE("bin_errors groups by target height and matches a sort oracle") {
  auto rng = make_rng(43);
  const std::size_t n = 10000;
  std::vector<double> pred(n), target(n);
  std::vector<std::uint8_t> valid(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    target[i] = uniform(rng, 1.5, 45.0);
    pred[i] = target[i] + normal(rng, 0, 2);
  }
  const auto bins = bin_errors(pred.data(), target.data(), valid.data(), n);
  REQUIRE(bins.size() == 7);

  double frac_sum = 0;
  std::size_t count_sum = 0;
  for (std::size_t b = 0; b < 7; ++b) {
    std::vector<double> errors;
    for (std::size_t i = 0; i < n; ++i)
      if (target[i] >= bins[b].lo && target[i] < bins[b].hi)
        errors.push_back(pred[i] - target[i]);
    REQUIRE(bins[b].count == errors.size());
    frac_sum += bins[b].fraction;
    count_sum += bins[b].count;
    if (errors.empty())
      continue;
    const double med = oracle_percentile(errors, 0.5);
    const double q1 = oracle_percentile(errors, 0.25);
    const double q3 = oracle_percentile(errors, 0.75);
    CHECK(std::abs(bins[b].median - med) < 1e-9);
    CHECK(std::abs(bins[b].q1 - q1) < 1e-9);
    CHECK(std::abs(bins[b].q3 - q3) < 1e-9);
    std::sort(errors.begin(), errors.end());
    const double lo_fence = q1 - 1.5 * (q3 - q1);
    const double hi_fence = q3 + 1.5 * (q3 - q1);
    double wlo = errors.back(), whi = errors.front();
    for (double e : errors) {
      if (e >= lo_fence) {
        wlo = e;
        break;
      }
    }
    for (auto it = errors.rbegin(); it != errors.rend(); ++it)
      if (*it <= hi_fence) {
        whi = *it;
        break;
      }
    CHECK(bins[b].whisker_lo == doctest::Approx(wlo).epsilon(1e-12));
    CHECK(bins[b].whisker_hi == doctest::Approx(whi).epsilon(1e-12));
  }
  CHECK(count_sum == n);
  CHECK(frac_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bin_errors emits empty bins as placeholders") {
  std::vector<double> target = {2.0, 2.5, 3.0, 4.0};
  std::vector<double> pred = {3.0, 1.5, 4.0, 3.0};
  std::vector<std::uint8_t> valid(4, 1);
  const auto bins = bin_errors(pred.data(), target.data(), valid.data(), 4);
  CHECK(bins[0].count == 4);
  CHECK(bins[0].fraction == 1.0);
  for (std::size_t b = 1; b < 7; ++b) {
    CHECK(bins[b].count == 0);
    CHECK(bins[b].fraction == 0.0);
  }

  // Symmetric errors around zero give a zero median.
  std::vector<double> sym_t = {2, 2, 2, 2};
  std::vector<double> sym_p = {1, 3, 1, 3};
  const auto sym = bin_errors(sym_p.data(), sym_t.data(), valid.data(), 4);
  CHECK(sym[0].median == 0.0);
}

TEST_CASE("fap profiles are deterministic and DC-anchored") {
  const Tensor img = noise_image(47, 64);
  const FapProfile a = fap(img);
  const FapProfile b = fap(img);
  REQUIRE(a.value.size() == b.value.size());
  for (std::size_t i = 0; i < a.value.size(); ++i)
    CHECK(a.value[i] == b.value[i]);
  CHECK(a.value.front() == 1.0);
  CHECK(a.freq.front() == doctest::Approx(0.5 / 32));
  CHECK(a.freq.back() == doctest::Approx(31.5 / 32));
  CHECK(a.value.size() == 32);

  Tensor rect({8, 16});
  CHECK_THROWS_AS(fap(rect), std::invalid_argument);
  Tensor tiny({4, 4});
  CHECK_THROWS_AS(fap(tiny), std::invalid_argument);
}

TEST_CASE("adding a constant moves only the DC bin of the raw magnitudes") {
  const Tensor img = noise_image(53, 64);
  Tensor shifted = img;
  for (std::size_t i = 0; i < shifted.size(); ++i)
    shifted[i] += 25.0;
  const FapProfile a = fap(img);
  const FapProfile s = fap(shifted);
  REQUIRE(a.magnitude.size() == s.magnitude.size());
  CHECK(std::abs(a.magnitude[0] - s.magnitude[0]) > 1.0);
  for (std::size_t i = 1; i < a.magnitude.size(); ++i)
    CHECK(s.magnitude[i] ==
          doctest::Approx(a.magnitude[i]).epsilon(1e-9).scale(a.magnitude[i]));
}

TEST_CASE("blurring attenuates the top frequency bins") {
  const Tensor raw = noise_image(59, 64);
  const Tensor blurred = gaussian_blur(raw, 1.5);
  const FapProfile pr = fap(raw);
  const FapProfile pb = fap(blurred);
  REQUIRE(pr.value.size() == 32);
  for (std::size_t i = 24; i < 32; ++i)
    CHECK(pb.value[i] < pr.value[i]);
}

TEST_CASE("downsample-then-bicubic never gains energy above half Nyquist") {
  const Tensor orig = noise_image(61, 64);
  const Tensor up = bicubic_upsample(box_downsample2(orig), 2);
  const FapProfile po = fap(orig);
  const FapProfile pu = fap(up);
  REQUIRE(po.freq.size() == pu.freq.size());
  for (std::size_t i = 0; i < po.freq.size(); ++i)
    if (po.freq[i] > 0.5)
      CHECK(pu.value[i] <= po.value[i] + 1e-12);
}

TEST_CASE("image helpers behave on simple inputs") {
  // Constant stays constant through resampling and blur.
  const Tensor flat = Tensor::full({16, 16}, 3.25);
  const Tensor up = bicubic_upsample(flat, 2);
  CHECK(up.dim(0) == 32);
  for (std::size_t i = 0; i < up.size(); ++i)
    CHECK(up[i] == doctest::Approx(3.25).epsilon(1e-12));
  const Tensor down = box_downsample2(flat);
  for (std::size_t i = 0; i < down.size(); ++i)
    CHECK(down[i] == 3.25);
  const Tensor blur = gaussian_blur(flat, 1.0);
  for (std::size_t i = 0; i < blur.size(); ++i)
    CHECK(blur[i] == doctest::Approx(3.25).epsilon(1e-12));

  Tensor img({4, 6});
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = double(i);
  const Tensor c = crop2d(img, 1, 2, 2, 3);
  CHECK(c.at(0, 0) == img.at(1, 2));
  CHECK(c.at(1, 2) == img.at(2, 4));
  CHECK_THROWS_AS(crop2d(img, 3, 0, 2, 2), std::invalid_argument);

  // Box downsample averages blocks exactly.
  Tensor quad({2, 2});
  quad[0] = 1;
  quad[1] = 2;
  quad[2] = 3;
  quad[3] = 6;
  CHECK(box_downsample2(quad)[0] == 3.0);
}
