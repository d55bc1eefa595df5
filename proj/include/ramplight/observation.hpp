#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ramplight/timeseries.hpp"

namespace ramplight {

/// The three evaluation settings. Each fixes the observation layout.
enum class ExperimentMode { FutureIrradiance, FutureFeatures, PastData };

std::string_view mode_name(ExperimentMode m);
ExperimentMode mode_from_name(std::string_view name);

// Layout constants.
inline constexpr int kIrrWindow = 6;  // current + 5 previous measurements
inline constexpr int kFutureIrrCount = 60;
inline constexpr double kFutureIrrSpacing = 15.0;  // seconds
inline constexpr std::array<double, 6> kFutureFeatureLeads = {0.0, 30.0, 60.0, 120.0, 300.0, 600.0};
inline constexpr std::array<double, 3> kPastFeatureLags = {0.0, 30.0, 60.0};

/// Names the observation slots and their dimensions for one mode.
///
///   FutureIrradiance: irr_window 6 | prev_output 1 | future_irradiance 60
///   FutureFeatures:   irr_window 6 | prev_output 1 | features at the 6
///                     future lead offsets, feature_dim each
///   PastData:         irr_window 6 | prev_output 1 | features at now and
///                     two past offsets, feature_dim each
struct ObservationSpec {
  ExperimentMode mode = ExperimentMode::PastData;
  int feature_dim = 0;  ///< columns of the paired FeatureSeries; 0 when unused

  int total_dim() const;
  std::vector<std::pair<std::string, int>> slots() const;
  bool operator==(const ObservationSpec&) const = default;
};

ObservationSpec make_observation_spec(ExperimentMode mode, int feature_dim);

/// Builds normalized policy inputs for one episode. Irradiance values go
/// through the training-split normalization; feature values are already
/// unit-interval and pass through unchanged. Indices past either episode end
/// clamp to the boundary sample.
class ObservationBuilder {
 public:
  ObservationBuilder(const Episode& episode, const NormalizationSpec& norm,
                     const ObservationSpec& spec);

  std::vector<double> build(int t, double u_prev) const;
  const ObservationSpec& spec() const { return spec_; }
  int steps() const { return static_cast<int>(episode_->irradiance.values.size()); }

 private:
  const Episode* episode_;
  NormalizationSpec norm_;
  ObservationSpec spec_;
  std::vector<int> feature_offsets_;  // signed step offsets of feature samples
};

}  // namespace ramplight
