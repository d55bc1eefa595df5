#include "ramplight/observation.hpp"

#include <algorithm>
#include <cmath>

#include "ramplight/common.hpp"

namespace ramplight {

std::string_view mode_name(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::FutureIrradiance: return "FutureIrradiance";
    case ExperimentMode::FutureFeatures: return "FutureFeatures";
    case ExperimentMode::PastData: return "PastData";
  }
  return "PastData";
}

ExperimentMode mode_from_name(std::string_view name) {
  if (name == "FutureIrradiance") return ExperimentMode::FutureIrradiance;
  if (name == "FutureFeatures") return ExperimentMode::FutureFeatures;
  if (name == "PastData") return ExperimentMode::PastData;
  throw ConfigError("unknown experiment mode: " + std::string(name));
}

int ObservationSpec::total_dim() const {
  int dim = 0;
  for (const auto& [name, width] : slots()) dim += width;
  return dim;
}

std::vector<std::pair<std::string, int>> ObservationSpec::slots() const {
  std::vector<std::pair<std::string, int>> out;
  out.emplace_back("irr_window", kIrrWindow);
  out.emplace_back("prev_output", 1);
  switch (mode) {
    case ExperimentMode::FutureIrradiance:
      out.emplace_back("future_irradiance", kFutureIrrCount);
      break;
    case ExperimentMode::FutureFeatures:
      out.emplace_back("future_features",
                       static_cast<int>(kFutureFeatureLeads.size()) * feature_dim);
      break;
    case ExperimentMode::PastData:
      out.emplace_back("past_features",
                       static_cast<int>(kPastFeatureLags.size()) * feature_dim);
      break;
  }
  return out;
}

ObservationSpec make_observation_spec(ExperimentMode mode, int feature_dim) {
  ObservationSpec spec;
  spec.mode = mode;
  if (mode == ExperimentMode::FutureIrradiance) {
    spec.feature_dim = 0;
  } else {
    if (feature_dim <= 0)
      throw ConfigError("observation spec: feature-based mode needs feature_dim > 0");
    spec.feature_dim = feature_dim;
  }
  return spec;
}

ObservationBuilder::ObservationBuilder(const Episode& episode, const NormalizationSpec& norm,
                                       const ObservationSpec& spec)
    : episode_(&episode), norm_(norm), spec_(spec) {
  norm.validate();
  const double dt = episode.irradiance.dt;
  if (spec.mode != ExperimentMode::FutureIrradiance) {
    if (episode.features.dim() != spec.feature_dim)
      throw ConfigError("observation builder: episode feature dimension does not match spec");
    if (episode.features.size() != episode.irradiance.size())
      throw ConfigError("observation builder: feature series length mismatch");
    const auto& offsets_s = spec.mode == ExperimentMode::FutureFeatures
                                ? std::vector<double>(kFutureFeatureLeads.begin(), kFutureFeatureLeads.end())
                                : std::vector<double>(kPastFeatureLags.begin(), kPastFeatureLags.end());
    const double sign = spec.mode == ExperimentMode::FutureFeatures ? 1.0 : -1.0;
    for (double seconds : offsets_s)
      feature_offsets_.push_back(static_cast<int>(std::llround(sign * seconds / dt)));
  }
}

std::vector<double> ObservationBuilder::build(int t, double u_prev) const {
  const auto& s = episode_->irradiance;
  const int n = s.size();
  if (t < 0 || t >= n) throw ConfigError("observation builder: step out of range");

  std::vector<double> obs;
  obs.reserve(spec_.total_dim());

  // Current and five previous measurements, clamped at the episode start.
  for (int back = 0; back < kIrrWindow; ++back) {
    const int idx = std::max(0, t - back);
    obs.push_back(norm_.normalize(s.values[idx]));
  }
  obs.push_back(norm_.normalize(u_prev));

  switch (spec_.mode) {
    case ExperimentMode::FutureIrradiance: {
      // 15 s spacing, linearly interpolated from the native grid; reads past
      // the episode end clamp to the final sample.
      for (int j = 1; j <= kFutureIrrCount; ++j) {
        const double pos = t + j * kFutureIrrSpacing / s.dt;
        const double clamped = std::min(pos, static_cast<double>(n - 1));
        const int i0 = static_cast<int>(std::floor(clamped));
        const int i1 = std::min(i0 + 1, n - 1);
        const double frac = clamped - i0;
        const double v = (1.0 - frac) * s.values[i0] + frac * s.values[i1];
        obs.push_back(norm_.normalize(v));
      }
      break;
    }
    case ExperimentMode::FutureFeatures:
    case ExperimentMode::PastData: {
      for (int off : feature_offsets_) {
        const int idx = std::clamp(t + off, 0, n - 1);
        const auto& row = episode_->features.rows[idx];
        obs.insert(obs.end(), row.begin(), row.end());
      }
      break;
    }
  }
  return obs;
}

}  // namespace ramplight
