#include "hba/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hba::eval {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

void check_pair(const Array& gt, const Array& s) {
  if (!gt.same_shape(s) || gt.ndim() != 2)
    throw std::invalid_argument("metric: trajectory shape mismatch " +
                                Array::shape_str(gt.shape()) + " vs " +
                                Array::shape_str(s.shape()));
}

}  // namespace

std::map<std::string, std::string> MetricReport::to_kv() const {
  std::map<std::string, std::string> kv;
  for (std::size_t i = 0; i < horizons.size(); ++i)
    kv["top10_err@" + std::to_string(horizons[i])] = fmt(top_errors[i]);
  kv["neg_cll"] = fmt(neg_cll);
  kv["unit_conversion"] = fmt(unit_conversion);
  kv["made"] = fmt(made);
  kv["mfde"] = fmt(mfde);
  kv["sampling_ms_median"] = fmt(sampling_ms_median);
  kv["sampling_ms_iqr"] = fmt(sampling_ms_iqr);
  kv["sampling_stages"] = std::to_string(sampling_stages);
  kv["sample_count"] = std::to_string(sample_count);
  kv["min_sample_count"] = std::to_string(min_sample_count);
  kv["seed"] = std::to_string(seed);
  kv["units"] = units;
  return kv;
}

std::string MetricReport::csv_header() const {
  std::string h;
  for (int hz : horizons) h += "top10_err@" + std::to_string(hz) + ",";
  return h +
         "neg_cll,unit_conversion,made,mfde,sampling_ms_median,"
         "sampling_ms_iqr,sampling_stages,sample_count,min_sample_count,seed,"
         "units";
}

std::string MetricReport::csv_row() const {
  std::string r;
  for (double e : top_errors) r += fmt(e) + ",";
  r += fmt(neg_cll) + "," + fmt(unit_conversion) + "," + fmt(made) + "," +
       fmt(mfde) + "," + fmt(sampling_ms_median) + "," + fmt(sampling_ms_iqr) +
       "," + std::to_string(sampling_stages) + "," +
       std::to_string(sample_count) + "," + std::to_string(min_sample_count) +
       "," + std::to_string(seed) + "," + units;
  return r;
}

double step_distance_at(const Array& gt, const Array& sample, int horizon) {
  check_pair(gt, sample);
  if (horizon < 1 || static_cast<std::size_t>(horizon) > gt.cols())
    throw std::invalid_argument("metric: horizon " + std::to_string(horizon) +
                                " beyond future length " +
                                std::to_string(gt.cols()));
  std::size_t t = static_cast<std::size_t>(horizon - 1);
  double sq = 0.0;
  for (std::size_t c = 0; c < gt.rows(); ++c) {
    double dv = gt.at2(c, t) - sample.at2(c, t);
    sq += dv * dv;
  }
  return std::sqrt(sq);
}

double mean_step_distance(const Array& gt, const Array& sample) {
  check_pair(gt, sample);
  double total = 0.0;
  for (std::size_t t = 1; t <= gt.cols(); ++t)
    total += step_distance_at(gt, sample, static_cast<int>(t));
  return total / static_cast<double>(gt.cols());
}

std::vector<double> top_fraction_error(const Array& gt,
                                       const std::vector<Array>& samples,
                                       double fraction,
                                       const std::vector<int>& horizons,
                                       bool per_horizon_ranking) {
  std::size_t n = samples.size();
  if (fraction * static_cast<double>(n) < 1.0)
    throw std::invalid_argument("top_fraction_error: n*fraction < 1");
  std::size_t keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)));

  std::vector<double> out;
  if (per_horizon_ranking) {
    for (int h : horizons) {
      std::vector<double> dist(n);
      for (std::size_t i = 0; i < n; ++i)
        dist[i] = step_distance_at(gt, samples[i], h);
      std::sort(dist.begin(), dist.end());
      out.push_back(std::accumulate(dist.begin(), dist.begin() + keep, 0.0) /
                    static_cast<double>(keep));
    }
    return out;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> full(n);
  for (std::size_t i = 0; i < n; ++i)
    full[i] = mean_step_distance(gt, samples[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return full[a] < full[b]; });
  for (int h : horizons) {
    double acc = 0.0;
    for (std::size_t i = 0; i < keep; ++i)
      acc += step_distance_at(gt, samples[order[i]], h);
    out.push_back(acc / static_cast<double>(keep));
  }
  return out;
}

double negative_cll(const HBAFlowModel& model,
                    const std::vector<data::Example>& test, bool parallel) {
  if (test.empty()) throw std::invalid_argument("negative_cll: empty set");
  std::vector<double> ll(test.size());
#pragma omp parallel for if (parallel) schedule(dynamic)
  for (long i = 0; i < static_cast<long>(test.size()); ++i)
    ll[i] = model.log_likelihood(test[i].y, test[i].x);
  double total = 0.0;
  for (double v : ll) total += v;  // fixed order
  return -total / static_cast<double>(test.size());
}

double unit_conversion_constant(std::size_t T_fut, std::size_t d,
                                double scale) {
  return static_cast<double>(T_fut * d) * std::log(scale);
}

std::pair<double, double> min_ade_fde(const Array& gt,
                                      const std::vector<Array>& samples,
                                      int expected_count) {
  if (static_cast<int>(samples.size()) != expected_count)
    throw std::invalid_argument("min_ade_fde: expected " +
                                std::to_string(expected_count) +
                                " samples, got " +
                                std::to_string(samples.size()));
  double made = std::numeric_limits<double>::infinity();
  double mfde = std::numeric_limits<double>::infinity();
  int last = static_cast<int>(gt.cols());
  for (const Array& s : samples) {
    made = std::min(made, mean_step_distance(gt, s));
    mfde = std::min(mfde, step_distance_at(gt, s, last));
  }
  return {made, mfde};
}

std::array<double, 3> mode_coverage(const std::vector<Array>& samples) {
  std::array<double, 3> freq{0.0, 0.0, 0.0};
  if (samples.empty()) return freq;
  for (const Array& s : samples) freq[data::classify_branch(s)] += 1.0;
  for (double& f : freq) f /= static_cast<double>(samples.size());
  return freq;
}

BenchResult benchmark_sampling(const HBAFlowModel& model, const Array& x,
                               int batch, int repeats, std::uint64_t seed) {
  BenchResult r;
  r.batch = batch;
  r.repeats = repeats;
  int T = model.config().T_fut;
  model.sample(x, 1, T, seed);  // warm-up
  std::vector<double> ms;
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    model.sample(x, batch, T, seed + static_cast<std::uint64_t>(i) + 1,
                 1.0, &r.stages);
    auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  r.median_ms = ms[ms.size() / 2];
  r.iqr_ms = ms[(3 * ms.size()) / 4] - ms[ms.size() / 4];
  return r;
}

void GaussianBaseline::fit(const std::vector<data::Example>& examples) {
  if (examples.empty())
    throw std::invalid_argument("GaussianBaseline: empty dataset");
  const Array& y0 = examples[0].y;
  mean_ = Array::zeros(y0.shape());
  logstd_ = Array::zeros(y0.shape());
  Array sq = Array::zeros(y0.shape());
  double inv = 1.0 / static_cast<double>(examples.size());
  for (const auto& ex : examples)
    for (std::size_t i = 0; i < mean_.numel(); ++i) {
      mean_[i] += inv * ex.y[i];
      sq[i] += inv * ex.y[i] * ex.y[i];
    }
  for (std::size_t i = 0; i < mean_.numel(); ++i) {
    double var = std::max(1e-12, sq[i] - mean_[i] * mean_[i]);
    logstd_[i] = 0.5 * std::log(var);
  }
}

double GaussianBaseline::log_likelihood(const Array& y) const {
  return gaussian_logprob_plain(y, mean_, logstd_);
}

double GaussianBaseline::negative_cll(
    const std::vector<data::Example>& test) const {
  double total = 0.0;
  for (const auto& ex : test) total += log_likelihood(ex.y);
  return -total / static_cast<double>(test.size());
}

Array GaussianBaseline::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Array out = Array::zeros(mean_.shape());
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = mean_[i] + std::exp(logstd_[i]) * gauss(rng);
  return out;
}

std::vector<Array> GaussianBaseline::sample_n(int n,
                                              std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<Array> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

}  // namespace hba::eval
