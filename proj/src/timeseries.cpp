#include "ramplight/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ramplight/common.hpp"

namespace ramplight {

void IrradianceSeries::validate() const {
  if (dt <= 0.0) throw ConfigError("irradiance series: dt must be > 0");
  if (values.size() < 2) throw ConfigError("irradiance series: need at least 2 samples");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("irradiance series: values must be finite and >= 0");
  }
}

void SyntheticConfig::validate() const {
  if (day_length <= 0.0 || dt <= 0.0) throw ConfigError("synthetic config: day_length and dt must be > 0");
  if (day_length < 2.0 * dt) throw ConfigError("synthetic config: day too short for two samples");
  if (clearsky_peak <= 0.0) throw ConfigError("synthetic config: clearsky_peak must be > 0");
  if (cloud_event_rate < 0.0) throw ConfigError("synthetic config: cloud_event_rate must be >= 0");
  if (!(occlusion_depth_min > 0.0 && occlusion_depth_min <= occlusion_depth_max && occlusion_depth_max <= 1.0))
    throw ConfigError("synthetic config: occlusion depth range must lie in (0, 1]");
  if (!(edge_duration_min > 0.0 && edge_duration_min <= edge_duration_max))
    throw ConfigError("synthetic config: edge duration range must be positive and nonempty");
  if (measurement_noise_sigma < 0.0 || feature_noise_sigma < 0.0)
    throw ConfigError("synthetic config: noise sigmas must be >= 0");
  if (feature_lead_times.empty()) throw ConfigError("synthetic config: need at least one feature lead time");
  for (double l : feature_lead_times)
    if (l < 0.0) throw ConfigError("synthetic config: feature lead times must be >= 0");
}

void NormalizationSpec::validate() const {
  if (!(max > min)) throw ConfigError("normalization spec: max must exceed min");
}

double clearsky_envelope(const SyntheticConfig& cfg, double t) {
  if (t < 0.0 || t > cfg.day_length) return 0.0;
  const double pi = 3.14159265358979323846;
  return cfg.clearsky_peak * std::sin(pi * t / cfg.day_length);
}

namespace {

// Trapezoid profile in [0, 1]: linear rise over `edge`, flat over `plateau`,
// linear fall over `edge`, centered on `center`.
double trapezoid(const CloudEvent& e, double t) {
  const double half_flat = 0.5 * e.plateau;
  const double d = std::abs(t - e.center);
  if (d <= half_flat) return 1.0;
  if (d >= half_flat + e.edge) return 0.0;
  return 1.0 - (d - half_flat) / e.edge;
}

}  // namespace

double occlusion_at(const std::vector<CloudEvent>& events, double t) {
  double occ = 1.0;
  for (const CloudEvent& e : events) occ *= 1.0 - e.depth * trapezoid(e, t);
  return occ;
}

std::vector<CloudEvent> sample_cloud_events(const SyntheticConfig& cfg, Rng& rng) {
  const double expected = cfg.cloud_event_rate * cfg.day_length / 3600.0;
  const int n = rng.poisson(expected);
  std::vector<CloudEvent> events;
  events.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CloudEvent e;
    e.center = rng.uniform(0.0, cfg.day_length);
    e.depth = rng.uniform(cfg.occlusion_depth_min, cfg.occlusion_depth_max);
    e.edge = rng.uniform(cfg.edge_duration_min, cfg.edge_duration_max);
    e.plateau = rng.uniform(cfg.edge_duration_min, cfg.edge_duration_max);
    events.push_back(e);
  }
  return events;
}

Episode generate_from_events(const SyntheticConfig& cfg,
                             const std::vector<CloudEvent>& events, Rng& rng,
                             int day_id) {
  cfg.validate();
  const int n = static_cast<int>(std::floor(cfg.day_length / cfg.dt)) + 1;

  Episode ep;
  ep.irradiance.start_time = 0.0;
  ep.irradiance.dt = cfg.dt;
  ep.irradiance.day_id = day_id;
  ep.irradiance.values.resize(n);
  ep.features.lead_times = cfg.feature_lead_times;
  ep.features.rows.assign(n, std::vector<double>(cfg.feature_lead_times.size()));

  std::vector<double> occ(n);
  for (int t = 0; t < n; ++t) occ[t] = occlusion_at(events, t * cfg.dt);
  const double last_occ = occ[n - 1];

  for (int t = 0; t < n; ++t) {
    const double env = clearsky_envelope(cfg, t * cfg.dt);
    const double noisy = env * occ[t] + rng.gaussian(cfg.measurement_noise_sigma);
    ep.irradiance.values[t] = std::max(0.0, noisy);
  }
  for (int t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < cfg.feature_lead_times.size(); ++j) {
      const double ahead = t * cfg.dt + cfg.feature_lead_times[j];
      const double base = ahead >= cfg.day_length
                              ? last_occ
                              : occlusion_at(events, ahead);
      const double noisy = base + rng.gaussian(cfg.feature_noise_sigma);
      ep.features.rows[t][j] = std::clamp(noisy, 0.0, 1.0);
    }
  }
  return ep;
}

Episode generate_synthetic(const SyntheticConfig& cfg, int day_id) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, "synthetic-day", static_cast<std::uint64_t>(day_id)));
  const std::vector<CloudEvent> events = sample_cloud_events(cfg, rng);
  return generate_from_events(cfg, events, rng, day_id);
}

IrradianceSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  IrradianceSeries s;
  std::string line;
  int line_no = 0;
  double prev_time = 0.0;
  bool have_prev = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double epoch = 0.0, value = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &epoch, &value) != 2)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected `epoch_seconds,irradiance`");
    if (value < 0.0)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": negative irradiance");
    if (!have_prev) {
      s.start_time = epoch;
      have_prev = true;
    } else {
      const double gap = epoch - prev_time;
      if (gap <= 0.0)
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": timestamps must strictly increase");
      if (s.values.size() == 1) {
        s.dt = gap;
      } else if (std::abs(gap - s.dt) > 1e-6 * std::max(1.0, s.dt)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-uniform timestamp");
      }
    }
    prev_time = epoch;
    s.values.push_back(value);
  }
  s.validate();
  return s;
}

void save_csv(const IrradianceSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[96];
  for (int t = 0; t < s.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.start_time + t * s.dt, s.values[t]);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureSeries load_features_csv(const std::filesystem::path& path,
                                const IrradianceSeries& series) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  FeatureSeries f;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# lead_times,", 0) == 0) {
      std::stringstream ss(line.substr(std::string("# lead_times,").size()));
      std::string tok;
      while (std::getline(ss, tok, ',')) f.lead_times.push_back(std::stod(tok));
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
      if (first) {
        first = false;  // epoch column, redundant with the series
        continue;
      }
      row.push_back(std::stod(tok));
    }
    f.rows.push_back(std::move(row));
  }
  if (f.lead_times.empty())
    throw IoError(path.string() + ": missing lead_times header");
  if (static_cast<int>(f.rows.size()) != series.size())
    throw IoError(path.string() + ": feature rows do not match series length");
  for (const auto& row : f.rows)
    if (static_cast<int>(row.size()) != f.dim())
      throw IoError(path.string() + ": inconsistent feature dimension");
  return f;
}

void save_features_csv(const IrradianceSeries& s, const FeatureSeries& f,
                       const std::filesystem::path& path) {
  if (f.size() != s.size()) throw ConfigError("feature series length mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  out << "# lead_times";
  for (double l : f.lead_times) {
    std::snprintf(buf, sizeof buf, ",%.17g", l);
    out << buf;
  }
  out << "\n";
  for (int t = 0; t < s.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", s.start_time + t * s.dt);
    out << buf;
    for (double v : f.rows[t]) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetSplit split_days(const std::vector<int>& day_ids,
                        const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (day_ids.size() < 3) throw ConfigError("split_days: need at least 3 days");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split_days: ratios must sum to 1");

  std::vector<int> ids = day_ids;
  Rng rng(derive_seed(seed, "split"));
  // Fisher-Yates with our own index draws.
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(ids[i], ids[j]);
  }
  const std::size_t n = ids.size();
  const auto cut1 = static_cast<std::size_t>(std::floor(ratios[0] * n));
  const auto cut2 = static_cast<std::size_t>(std::floor((ratios[0] + ratios[1]) * n));

  DatasetSplit split;
  split.train.assign(ids.begin(), ids.begin() + cut1);
  split.validation.assign(ids.begin() + cut1, ids.begin() + cut2);
  split.test.assign(ids.begin() + cut2, ids.end());
  return split;
}

NormalizationSpec fit_normalization(const std::vector<const IrradianceSeries*>& train_series) {
  if (train_series.empty()) throw ConfigError("fit_normalization: empty training split");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const IrradianceSeries* s : train_series) {
    for (double v : s->values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  NormalizationSpec spec{lo, hi};
  spec.validate();
  return spec;
}

std::vector<double> normalize(const IrradianceSeries& s, const NormalizationSpec& spec) {
  spec.validate();
  std::vector<double> out(s.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.normalize(s.values[i]);
  return out;
}

}  // namespace ramplight
