#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hba/data.hpp"
#include "hba/model.hpp"

namespace hba::eval {

struct MetricReport {
  std::vector<int> horizons;             // future step indices (1-based)
  std::vector<double> top_errors;        // top-10% error per horizon
  double neg_cll = 0.0;                  // nats, normalized units
  double unit_conversion = 0.0;          // additive constant to scene units
  double made = 0.0, mfde = 0.0;
  double sampling_ms_median = -1.0;
  double sampling_ms_iqr = -1.0;
  int sampling_stages = 0;
  int sample_count = 0;
  int min_sample_count = 0;
  std::uint64_t seed = 0;
  std::string units = "normalized";

  std::map<std::string, std::string> to_kv() const;
  std::string csv_header() const;
  std::string csv_row() const;
};

// Mean per-step Euclidean distance between [2,T] trajectories.
double mean_step_distance(const Array& gt, const Array& sample);
double step_distance_at(const Array& gt, const Array& sample, int horizon);

// Ranks samples by full-trajectory mean distance, keeps the best
// ceil(n*fraction), and averages their per-horizon distances.
// per_horizon_ranking=true instead ranks independently at each horizon.
std::vector<double> top_fraction_error(const Array& gt,
                                       const std::vector<Array>& samples,
                                       double fraction,
                                       const std::vector<int>& horizons,
                                       bool per_horizon_ranking = false);

// Mean -log p(y|x) over the test set, normalized units. The additive
// constant for scene units is T_fut*d*log(scale).
double negative_cll(const HBAFlowModel& model,
                    const std::vector<data::Example>& test, bool parallel = true);
double unit_conversion_constant(std::size_t T_fut, std::size_t d,
                                double scale);

std::pair<double, double> min_ade_fde(const Array& gt,
                                      const std::vector<Array>& samples,
                                      int expected_count = 20);

// Fraction of samples whose final heading lands in each synthetic branch.
std::array<double, 3> mode_coverage(const std::vector<Array>& samples);

struct BenchResult {
  double median_ms = 0.0;
  double iqr_ms = 0.0;
  int stages = 0;
  int batch = 0;
  int repeats = 0;
};
BenchResult benchmark_sampling(const HBAFlowModel& model, const Array& x,
                               int batch = 128, int repeats = 5,
                               std::uint64_t seed = 0);

// Unimodal per-step conditional Gaussian fit on normalized futures;
// the reference point for the multimodality comparison.
class GaussianBaseline {
 public:
  void fit(const std::vector<data::Example>& examples);
  double log_likelihood(const Array& y) const;
  double negative_cll(const std::vector<data::Example>& test) const;
  Array sample(std::mt19937_64& rng) const;
  std::vector<Array> sample_n(int n, std::uint64_t seed) const;

 private:
  Array mean_, logstd_;
};

}  // namespace hba::eval
