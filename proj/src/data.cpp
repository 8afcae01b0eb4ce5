#include "hba/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hba::data {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line_no,
                    const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite value");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("trajectory csv: line " +
                             std::to_string(line_no) + ": cannot parse " +
                             what + " from '" + s + "'");
  }
}

}  // namespace

void SyntheticScenarioConfig::validate() const {
  double sum = p_straight + p_left + p_right;
  if (p_straight < 0 || p_left < 0 || p_right < 0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(
        "synthetic config: branch probabilities must be non-negative and sum "
        "to 1, got " +
        std::to_string(p_straight) + "/" + std::to_string(p_left) + "/" +
        std::to_string(p_right));
  if (speed_std < 0 || noise_std < 0)
    throw std::invalid_argument("synthetic config: stds must be >= 0");
  if (T_obs < 1 || T_fut < 1 || count < 1)
    throw std::invalid_argument("synthetic config: T_obs, T_fut, count >= 1");
}

std::vector<Track> generate_synthetic(const SyntheticScenarioConfig& cfg) {
  cfg.validate();
  std::vector<Track> tracks;
  tracks.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ull *
                                       static_cast<std::uint64_t>(i + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double speed = cfg.speed_mean + cfg.speed_std * gauss(rng);
    double pick = unif(rng);
    int branch = pick < cfg.p_straight ? 0
                 : pick < cfg.p_straight + cfg.p_left ? 1
                                                      : 2;
    Track tr;
    tr.id = "track" + std::to_string(i);
    for (int j = 0; j < cfg.T_obs; ++j) {
      double nx = cfg.noise_std * gauss(rng);
      double ny = cfg.noise_std * gauss(rng);
      tr.times.push_back(static_cast<double>(j));
      tr.points.push_back(
          {-(static_cast<double>(cfg.T_obs - 1 - j)) * speed + nx, ny});
    }
    for (int j = 0; j < cfg.T_fut; ++j) {
      double step = static_cast<double>(j + 1) * speed;
      double px = 0.0, py = 0.0;
      if (branch == 0) px = step;
      if (branch == 1) py = step;
      if (branch == 2) py = -step;
      px += cfg.noise_std * gauss(rng);
      py += cfg.noise_std * gauss(rng);
      tr.times.push_back(static_cast<double>(cfg.T_obs + j));
      tr.points.push_back({px, py});
    }
    tracks.push_back(std::move(tr));
  }
  return tracks;
}

int classify_branch(const Array& future) {
  if (future.ndim() != 2 || future.shape()[0] != 2 || future.shape()[1] < 1)
    throw std::invalid_argument("classify_branch: need [2,T] trajectory");
  std::size_t last = future.shape()[1] - 1;
  double fx = future.at2(0, last);
  double fy = future.at2(1, last);
  if (std::abs(fy) <= std::abs(fx) && fx >= 0.0) return 0;  // straight
  return fy > 0.0 ? 1 : 2;                                  // left / right
}

std::vector<Track> load_tracks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trajectory csv: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw std::runtime_error("trajectory csv: empty file " + path);
  ++line_no;
  if (line == "track_id,t,x,y\r") line.pop_back();
  if (line != "track_id,t,x,y")
    throw std::runtime_error(
        "trajectory csv: expected header 'track_id,t,x,y', got '" + line +
        "'");

  std::vector<Track> tracks;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, ts, xs, ys, extra;
    if (!std::getline(ss, id, ',') || !std::getline(ss, ts, ',') ||
        !std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
      throw std::runtime_error("trajectory csv: line " +
                               std::to_string(line_no) +
                               ": expected 4 comma-separated columns");
    if (std::getline(ss, extra, ','))
      throw std::runtime_error("trajectory csv: line " +
                               std::to_string(line_no) +
                               ": too many columns");
    double t = parse_double(ts, line_no, "t");
    double x = parse_double(xs, line_no, "x");
    double y = parse_double(ys, line_no, "y");
    auto [it, fresh] = index.emplace(id, tracks.size());
    if (fresh) tracks.push_back(Track{id, {}, {}});
    Track& tr = tracks[it->second];
    if (!tr.times.empty() && t <= tr.times.back())
      throw std::runtime_error("trajectory csv: line " +
                               std::to_string(line_no) + ": track '" + id +
                               "' timestamps not strictly increasing");
    tr.times.push_back(t);
    tr.points.push_back({x, y});
  }
  return tracks;
}

void save_tracks(const std::string& path, const std::vector<Track>& tracks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("trajectory csv: cannot write " + path);
  out << "track_id,t,x,y\n";
  for (const Track& tr : tracks)
    for (std::size_t i = 0; i < tr.size(); ++i)
      out << tr.id << "," << fmt_double(tr.times[i]) << ","
          << fmt_double(tr.points[i][0]) << "," << fmt_double(tr.points[i][1])
          << "\n";
  if (!out) throw std::runtime_error("trajectory csv: write failed " + path);
}

Dataset window_and_normalize(const std::vector<Track>& tracks,
                             const WindowConfig& cfg) {
  if (cfg.T_obs < 1 || cfg.T_fut < 1 || cfg.stride < 1)
    throw std::invalid_argument("window config: T_obs, T_fut, stride >= 1");
  const std::size_t win =
      static_cast<std::size_t>(cfg.T_obs) + static_cast<std::size_t>(cfg.T_fut);

  // Dataset-level scale: std of per-step displacement components.
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const Track& tr : tracks)
    for (std::size_t i = 1; i < tr.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        double dv = tr.points[i][c] - tr.points[i - 1][c];
        sum += dv;
        sq += dv * dv;
        ++n;
      }
  double scale = 1.0;
  if (n > 1) {
    double mean = sum / static_cast<double>(n);
    double var = sq / static_cast<double>(n) - mean * mean;
    if (var > 1e-24) scale = std::sqrt(var);
  }

  Dataset out;
  out.scale = scale;
  for (const Track& tr : tracks) {
    if (tr.size() < win) continue;
    for (std::size_t start = 0; start + win <= tr.size();
         start += static_cast<std::size_t>(cfg.stride)) {
      Example ex;
      ex.track_id = tr.id;
      std::size_t split = start + static_cast<std::size_t>(cfg.T_obs);
      ex.norm.offset = tr.points[split - 1];
      ex.norm.scale = scale;
      ex.x = Array::zeros({2, static_cast<std::size_t>(cfg.T_obs)});
      ex.y = Array::zeros({2, static_cast<std::size_t>(cfg.T_fut)});
      for (int j = 0; j < cfg.T_obs; ++j)
        for (int c = 0; c < 2; ++c)
          ex.x.at2(c, j) =
              (tr.points[start + j][c] - ex.norm.offset[c]) / scale;
      for (int j = 0; j < cfg.T_fut; ++j)
        for (int c = 0; c < 2; ++c)
          ex.y.at2(c, j) =
              (tr.points[split + j][c] - ex.norm.offset[c]) / scale;
      out.examples.push_back(std::move(ex));
    }
  }
  if (out.examples.empty())
    throw std::runtime_error(
        "window_and_normalize: no track is long enough for one window (need " +
        std::to_string(win) + " samples)");
  return out;
}

Array denormalize(const Array& traj, const NormRecord& norm) {
  Array out = traj;
  for (std::size_t t = 0; t < out.cols(); ++t)
    for (int c = 0; c < 2; ++c)
      out.at2(c, t) = out.at2(c, t) * norm.scale + norm.offset[c];
  return out;
}

Array normalize_with(const Array& traj, const NormRecord& norm) {
  Array out = traj;
  for (std::size_t t = 0; t < out.cols(); ++t)
    for (int c = 0; c < 2; ++c)
      out.at2(c, t) = (out.at2(c, t) - norm.offset[c]) / norm.scale;
  return out;
}

std::vector<int> kfold_split(const std::vector<Example>& examples, int folds,
                             std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("kfold_split: folds >= 2");
  std::vector<std::string> ids;
  for (const Example& ex : examples)
    if (std::find(ids.begin(), ids.end(), ex.track_id) == ids.end())
      ids.push_back(ex.track_id);
  if (static_cast<int>(ids.size()) < folds)
    throw std::runtime_error("kfold_split: need at least " +
                             std::to_string(folds) + " tracks, have " +
                             std::to_string(ids.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::map<std::string, int> fold_of;
  for (std::size_t i = 0; i < ids.size(); ++i)
    fold_of[ids[i]] = static_cast<int>(i % folds);
  std::vector<int> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) out.push_back(fold_of[ex.track_id]);
  return out;
}

void save_manifest(const std::string& path,
                   const std::map<std::string, std::string>& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  for (auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos)
      kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace hba::data
