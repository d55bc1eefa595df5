#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ramplight/rng.hpp"

namespace ramplight {

/// Uniformly sampled point irradiance for one day episode.
struct IrradianceSeries {
  double start_time = 0.0;  ///< epoch seconds of the first sample
  double dt = 7.0;          ///< sample interval, seconds
  std::vector<double> values;  ///< W/m^2, all >= 0 and finite
  int day_id = 0;

  int size() const { return static_cast<int>(values.size()); }
  void validate() const;  ///< throws ConfigError on invariant violation
};

/// Per-step feature vectors in [0, 1]; the desk-scale stand-in for what an
/// image backbone would extract from sky frames. Column j carries a noisy
/// view of the cloud occlusion factor lead_times[j] seconds ahead.
struct FeatureSeries {
  std::vector<std::vector<double>> rows;  ///< one vector per time step
  std::vector<double> lead_times;         ///< seconds, one per column

  int dim() const { return static_cast<int>(lead_times.size()); }
  int size() const { return static_cast<int>(rows.size()); }
};

struct Episode {
  IrradianceSeries irradiance;
  FeatureSeries features;
};

/// One cloud passage: a trapezoidal dip in the occlusion factor.
struct CloudEvent {
  double center;   ///< seconds from episode start, middle of the plateau
  double depth;    ///< dip depth, fraction in (0, 1]
  double edge;     ///< duration of each linear edge, seconds
  double plateau;  ///< flat-bottom duration, seconds
};

struct SyntheticConfig {
  double day_length = 1800.0;    ///< seconds
  double dt = 7.0;               ///< sample interval, seconds
  double clearsky_peak = 1000.0; ///< W/m^2 at the top of the half-sine
  double cloud_event_rate = 18.0;  ///< events per hour
  double occlusion_depth_min = 0.3;
  double occlusion_depth_max = 0.95;
  double edge_duration_min = 15.0;  ///< seconds
  double edge_duration_max = 90.0;
  double measurement_noise_sigma = 2.0;  ///< W/m^2
  double feature_noise_sigma = 0.02;     ///< unitless
  std::vector<double> feature_lead_times = {0.0};  ///< seconds
  std::uint64_t seed = 1;

  void validate() const;
};

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

/// Irradiance scaling range; always fitted on the training split only.
struct NormalizationSpec {
  double min = 0.0;
  double max = 1.0;

  void validate() const;  ///< max > min
  /// (v - min) / (max - min). Values outside the fitted range are not
  /// clipped, so test-time inputs may leave [0, 1].
  double normalize(double v) const { return (v - min) / (max - min); }
  double denormalize(double x) const { return min + x * (max - min); }
};

/// Clear-sky envelope: half-sine over the day, zero at both ends.
double clearsky_envelope(const SyntheticConfig& cfg, double t);

/// Combined occlusion factor of a set of events at time t, in [0, 1].
/// Events multiply: each contributes (1 - depth * trapezoid(t)).
double occlusion_at(const std::vector<CloudEvent>& events, double t);

std::vector<CloudEvent> sample_cloud_events(const SyntheticConfig& cfg, Rng& rng);

/// Synthesizes one episode. Deterministic given (cfg.seed, day_id).
Episode generate_synthetic(const SyntheticConfig& cfg, int day_id = 0);

/// Same pipeline with a caller-provided event list; noise is drawn from rng.
Episode generate_from_events(const SyntheticConfig& cfg,
                             const std::vector<CloudEvent>& events, Rng& rng,
                             int day_id = 0);

/// Reads `epoch_seconds,irradiance_w_m2` lines; dt is inferred from the first
/// gap and every later gap must match it.
IrradianceSeries load_csv(const std::filesystem::path& path);
void save_csv(const IrradianceSeries& s, const std::filesystem::path& path);

/// Sidecar format: epoch_seconds followed by the feature columns. The first
/// line is a comment carrying the lead times.
FeatureSeries load_features_csv(const std::filesystem::path& path,
                                const IrradianceSeries& series);
void save_features_csv(const IrradianceSeries& s, const FeatureSeries& f,
                       const std::filesystem::path& path);

/// Random permutation by seed, then contiguous cuts at floor(r0*n) and
/// floor((r0+r1)*n). Requires at least 3 days.
DatasetSplit split_days(const std::vector<int>& day_ids,
                        const std::array<double, 3>& ratios, std::uint64_t seed);

NormalizationSpec fit_normalization(const std::vector<const IrradianceSeries*>& train_series);

std::vector<double> normalize(const IrradianceSeries& s, const NormalizationSpec& spec);

}  // namespace ramplight
