#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hba/array.hpp"

namespace hba::data {

// One recorded agent. Positions are 2-D scene coordinates.
struct Track {
  std::string id;
  std::vector<double> times;            // seconds, strictly increasing
  std::vector<std::array<double, 2>> points;

  std::size_t size() const { return times.size(); }
};

struct NormRecord {
  std::array<double, 2> offset{0.0, 0.0};  // last observed point
  double scale = 1.0;                      // dataset-level displacement std
};

// An (observed, future) pair in normalized model units, [d,T] layout.
struct Example {
  Array x;  // [2, T_obs]
  Array y;  // [2, T_fut]
  NormRecord norm;
  std::string track_id;
};

struct SyntheticScenarioConfig {
  double p_straight = 0.4;
  double p_left = 0.4;
  double p_right = 0.2;
  double speed_mean = 1.0;
  double speed_std = 0.1;
  double noise_std = 0.02;
  int T_obs = 8;
  int T_fut = 16;
  int count = 512;
  std::uint64_t seed = 0;

  void validate() const;
};

// Agents approach an intersection at the origin and branch into one of
// three headings. One track per agent, per-track RNG derived from the
// master seed.
std::vector<Track> generate_synthetic(const SyntheticScenarioConfig& cfg);

// Branch index of a trajectory in the synthetic scene geometry:
// 0 straight (+x), 1 left (+y), 2 right (-y). Uses the final
// displacement direction from the trajectory start.
int classify_branch(const Array& future);

// CSV schema: header "track_id,t,x,y", comma separated, LF endings.
std::vector<Track> load_tracks(const std::string& path);
void save_tracks(const std::string& path, const std::vector<Track>& tracks);

struct WindowConfig {
  int T_obs = 8;
  int T_fut = 16;
  int stride = 1;
};

struct Dataset {
  std::vector<Example> examples;
  double scale = 1.0;
};

// Sliding windows, translated so the last observed point is the origin
// and scaled by the dataset-level displacement std. T_fut must stay
// divisible by 2^K for the model in use (checked by the caller).
Dataset window_and_normalize(const std::vector<Track>& tracks,
                             const WindowConfig& cfg);

// Scene-unit reconstruction of a normalized [2,T] trajectory.
Array denormalize(const Array& traj, const NormRecord& norm);
Array normalize_with(const Array& traj, const NormRecord& norm);

// Partition by track id, no track straddles folds.
std::vector<int> kfold_split(const std::vector<Example>& examples, int folds,
                             std::uint64_t seed);

// Key-value manifest describing a generated dataset.
void save_manifest(const std::string& path,
                   const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> load_manifest(const std::string& path);

}  // namespace hba::data
