#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hba/eval.hpp"

using namespace hba;
using namespace hba::eval;

namespace {

Array offset_traj(const Array& gt, double r) {
  Array s = gt;
  for (std::size_t t = 0; t < s.cols(); ++t) s.at2(0, t) += r;
  return s;
}

Array straight_gt(std::size_t T) {
  Array gt = Array::zeros({2, T});
  for (std::size_t t = 0; t < T; ++t) gt.at2(0, t) = static_cast<double>(t + 1);
  return gt;
}

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.K = 1;
  cfg.d = 2;
  cfg.T_obs = 4;
  cfg.T_fut = 4;
  cfg.steps_per_stack = 2;
  cfg.channels = 4;
  cfg.layers = 2;
  cfg.dilations = {1, 2};
  cfg.enc_channels = 3;
  return cfg;
}

std::vector<data::Example> standard_normal_examples(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<data::Example> out(n);
  for (auto& ex : out) {
    ex.x = Array::zeros({2, 4});
    ex.y = Array::zeros({2, 4});
    for (std::size_t i = 0; i < ex.y.numel(); ++i) ex.y[i] = gauss(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("step distances on hand trajectories") {
  Array gt({2, 2}, {0, 3, 0, 4});   // points (0,0), (3,4)
  Array s({2, 2}, {0, 0, 0, 0});
  CHECK(step_distance_at(gt, s, 1) == doctest::Approx(0.0));
  CHECK(step_distance_at(gt, s, 2) == doctest::Approx(5.0));
  CHECK(mean_step_distance(gt, s) == doctest::Approx(2.5));
  CHECK_THROWS_AS(step_distance_at(gt, s, 0), std::invalid_argument);
  CHECK_THROWS_AS(step_distance_at(gt, s, 3), std::invalid_argument);
  CHECK_THROWS_AS(mean_step_distance(gt, Array::zeros({2, 3})),
                  std::invalid_argument);
}

TEST_CASE("top-fraction error keeps the exact match when it wins") {
  std::mt19937_64 rng(1);
  Array gt = straight_gt(4);
  std::vector<Array> samples;
  std::uniform_real_distribution<double> off(0.5, 3.0);
  for (int i = 0; i < 49; ++i) samples.push_back(offset_traj(gt, off(rng)));
  samples.push_back(gt);
  auto err = top_fraction_error(gt, samples, 0.02, {1, 2, 4});
  for (double e : err) CHECK(e == doctest::Approx(0.0));
}

TEST_CASE("top-fraction error: hand-computed ranking oracle") {
  Array gt = straight_gt(4);
  // Constant-offset samples have per-horizon distance == |offset|.
  std::vector<double> offsets = {3.0, 0.5, 2.0, 1.5, 0.25,
                                 4.0, 2.5, 1.0, 3.5, 0.75};
  std::vector<Array> samples;
  for (double r : offsets) samples.push_back(offset_traj(gt, r));
  auto err = top_fraction_error(gt, samples, 0.2, {1, 4});
  // Two smallest offsets: 0.25 and 0.5 -> mean 0.375 at every horizon.
  CHECK(err[0] == doctest::Approx(0.375));
  CHECK(err[1] == doctest::Approx(0.375));
  // Independent per-horizon ranking gives the same answer here.
  auto per = top_fraction_error(gt, samples, 0.2, {1, 4}, true);
  CHECK(per[0] == doctest::Approx(0.375));
  CHECK_THROWS_AS(top_fraction_error(gt, samples, 0.05, {1}),
                  std::invalid_argument);
}

TEST_CASE("top-fraction error is monotone in the kept fraction") {
  std::mt19937_64 rng(2);
  Array gt = straight_gt(8);
  std::vector<Array> samples;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Array s = gt;
    for (std::size_t j = 0; j < s.numel(); ++j) s[j] += gauss(rng);
    samples.push_back(s);
  }
  // Per-horizon ranking keeps the k smallest distances at the horizon, so
  // the kept mean cannot decrease as k grows.
  double prev = 0.0;
  for (double frac : {0.1, 0.3, 0.6, 1.0}) {
    double e = top_fraction_error(gt, samples, frac, {8}, true)[0];
    CHECK(e >= prev - 1e-12);
    prev = e;
  }
}

TEST_CASE("min ade/fde enumeration oracles") {
  Array gt = straight_gt(4);
  {
    std::vector<Array> samples = {offset_traj(gt, 2.0), gt,
                                  offset_traj(gt, 1.0)};
    auto [ade, fde] = min_ade_fde(gt, samples, 3);
    CHECK(ade == doctest::Approx(0.0));
    CHECK(fde == doctest::Approx(0.0));
  }
  {
    std::vector<Array> samples = {offset_traj(gt, 0.7), offset_traj(gt, 0.7),
                                  offset_traj(gt, 0.7)};
    auto [ade, fde] = min_ade_fde(gt, samples, 3);
    CHECK(ade == doctest::Approx(0.7));
    CHECK(fde == doctest::Approx(0.7));
  }
  {
    // Mixed: one sample good early but bad late, one the reverse, one flat.
    Array a = gt;                       // exact until last step
    a.at2(0, 3) += 4.0;                 // per-step distances 0,0,0,4
    Array b = offset_traj(gt, 1.0);     // 1,1,1,1
    Array c = offset_traj(gt, 3.0);     // 3,3,3,3
    auto [ade, fde] = min_ade_fde(gt, {a, b, c}, 3);
    CHECK(ade == doctest::Approx(1.0));  // b wins the average
    CHECK(fde == doctest::Approx(1.0));  // b also wins the endpoint
  }
  CHECK_THROWS_AS(min_ade_fde(gt, {gt}, 3), std::invalid_argument);
}

TEST_CASE("mode coverage on crafted sample sets") {
  Array straight({2, 1}, {5.0, 0.0});
  Array left({2, 1}, {0.0, 5.0});
  Array right({2, 1}, {0.0, -5.0});
  auto f = mode_coverage({straight, straight, straight});
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(0.0));
  CHECK(f[2] == doctest::Approx(0.0));
  f = mode_coverage({straight, left, left, right});
  CHECK(f[0] == doctest::Approx(0.25));
  CHECK(f[1] == doctest::Approx(0.5));
  CHECK(f[2] == doctest::Approx(0.25));
}

TEST_CASE("mode coverage of generator samples matches its probabilities") {
  data::SyntheticScenarioConfig cfg;
  cfg.count = 1000;
  cfg.seed = 3;
  auto tracks = data::generate_synthetic(cfg);
  std::vector<Array> futures;
  for (const auto& tr : tracks) {
    Array y = Array::zeros({2, static_cast<std::size_t>(cfg.T_fut)});
    for (int j = 0; j < cfg.T_fut; ++j) {
      y.at2(0, j) = tr.points[cfg.T_obs + j][0];
      y.at2(1, j) = tr.points[cfg.T_obs + j][1];
    }
    futures.push_back(y);
  }
  auto f = mode_coverage(futures);
  CHECK(std::abs(f[0] - 0.4) < 0.05);
  CHECK(std::abs(f[1] - 0.4) < 0.05);
  CHECK(std::abs(f[2] - 0.2) < 0.05);
}

TEST_CASE("negative cll is a mean: duplication leaves it unchanged") {
  HBAFlowModel model(tiny_model_config());
  auto ds = standard_normal_examples(6, 4);
  double once = negative_cll(model, ds);
  auto doubled = ds;
  doubled.insert(doubled.end(), ds.begin(), ds.end());
  CHECK(negative_cll(model, doubled) == doctest::Approx(once).epsilon(1e-12));
  CHECK(negative_cll(model, ds, false) == once);
  CHECK_THROWS_AS(negative_cll(model, {}), std::invalid_argument);
}

TEST_CASE("negative cll matches the analytic entropy of an exact model") {
  // An identity-initialized model puts N(0, I) on the pyramid coefficients,
  // so drawing data from that exact distribution makes -CLL estimate the
  // model's differential entropy. The mixing step is volume preserving
  // (logdet ~ 0 for alpha ~ 0), so the entropy equals the latent one,
  // D/2 * log(2*pi*e).
  ModelConfig cfg = tiny_model_config();
  HBAFlowModel model(cfg);
  model.params().at("haar.alpha")[0] = -60.0;
  double alpha = haar::MixParam{-60.0}.realized();

  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<data::Example> ds(8000);
  for (auto& ex : ds) {
    ex.x = Array::zeros({2, 4});
    Array f = Array::zeros({2, 2}), c = Array::zeros({2, 2});
    for (std::size_t i = 0; i < f.numel(); ++i) f[i] = gauss(rng);
    for (std::size_t i = 0; i < c.numel(); ++i) c[i] = gauss(rng);
    ex.y = haar::f_hba_inverse(f, c, alpha);
  }
  double got = negative_cll(model, ds);
  double entropy = 8.0 / 2.0 * std::log(2.0 * M_PI * std::exp(1.0));
  CHECK(std::abs(got - entropy) < 0.05);
}

TEST_CASE("gaussian baseline recovers a known generator") {
  // Generator: independent N(mu_i, sigma_i) per coordinate.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Array mu({2, 4}, {1, -1, 2, 0, 0.5, 3, -2, 1});
  Array sigma({2, 4}, {0.5, 1.0, 2.0, 0.3, 1.5, 0.8, 0.6, 1.2});
  auto draw = [&](int n) {
    std::vector<data::Example> out(n);
    for (auto& ex : out) {
      ex.x = Array::zeros({2, 4});
      ex.y = Array::zeros({2, 4});
      for (std::size_t i = 0; i < 8; ++i)
        ex.y[i] = mu[i] + sigma[i] * gauss(rng);
    }
    return out;
  };
  GaussianBaseline base;
  base.fit(draw(20000));
  double got = base.negative_cll(draw(20000));
  double entropy = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    entropy += 0.5 * std::log(2.0 * M_PI * std::exp(1.0) * sigma[i] * sigma[i]);
  CHECK(std::abs(got - entropy) < 0.05);

  auto samples = base.sample_n(5, 9);
  CHECK(samples.size() == 5);
  CHECK(base.sample_n(5, 9)[0].values() == samples[0].values());
  CHECK_THROWS_AS(base.fit({}), std::invalid_argument);
}

TEST_CASE("unit conversion constant") {
  CHECK(unit_conversion_constant(2, 1, 2.0) ==
        doctest::Approx(2.0 * std::log(2.0)));
  CHECK(unit_conversion_constant(16, 2, 1.0) == doctest::Approx(0.0));
  // Conversion consistency: -CLL in scene units equals the normalized
  // value plus the constant, by the change of variables y_scene = s*y.
  HBAFlowModel model(tiny_model_config());
  auto ds = standard_normal_examples(4, 7);
  double norm_units = negative_cll(model, ds);
  double scale = 2.5;
  double scene_units = norm_units + unit_conversion_constant(4, 2, scale);
  CHECK(scene_units == doctest::Approx(norm_units + 8.0 * std::log(scale)));
}

TEST_CASE("sampling benchmark returns finite measurements") {
  HBAFlowModel model(tiny_model_config());
  Array x = Array::zeros({2, 4});
  BenchResult r = benchmark_sampling(model, x, 4, 1, 0);
  CHECK(r.median_ms > 0.0);
  CHECK(std::isfinite(r.median_ms));
  CHECK(r.stages == 2);  // K + 1
  CHECK(r.batch == 4);
  CHECK(r.repeats == 1);
}

TEST_CASE("metric report serializes every field") {
  MetricReport rep;
  rep.horizons = {1, 4};
  rep.top_errors = {0.5, 1.5};
  rep.neg_cll = 3.25;
  rep.made = 0.75;
  rep.mfde = 1.25;
  rep.sample_count = 50;
  rep.min_sample_count = 50;
  rep.seed = 17;
  auto kv = rep.to_kv();
  CHECK(kv.at("top10_err@1") == "0.5");
  CHECK(kv.at("neg_cll") == "3.25");
  CHECK(kv.at("seed") == "17");
  CHECK(kv.at("sample_count") == "50");
  // Header and row agree on column count.
  auto count = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(count(rep.csv_header()) == count(rep.csv_row()));
}
