#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "ramplight/common.hpp"
#include "ramplight/timeseries.hpp"

using namespace ramplight;
namespace fs = std::filesystem;

namespace {

SyntheticConfig quiet_config() {
  SyntheticConfig cfg;
  cfg.day_length = 700.0;
  cfg.dt = 7.0;
  cfg.clearsky_peak = 800.0;
  cfg.cloud_event_rate = 0.0;
  cfg.measurement_noise_sigma = 0.0;
  cfg.feature_noise_sigma = 0.0;
  cfg.feature_lead_times = {0.0, 60.0};
  cfg.seed = 5;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ramplight-ts-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("clear sky with no clouds and no noise is the pure half-sine") {
  const SyntheticConfig cfg = quiet_config();
  const Episode ep = generate_synthetic(cfg, 0);
  REQUIRE(ep.irradiance.size() == 101);
  const double pi = 3.14159265358979323846;
  for (int t = 0; t < ep.irradiance.size(); ++t) {
    const double expected = cfg.clearsky_peak * std::sin(pi * t * cfg.dt / cfg.day_length);
    CHECK(ep.irradiance.values[t] == doctest::Approx(std::max(0.0, expected)).epsilon(1e-12));
  }
  for (const auto& row : ep.features.rows)
    for (double f : row) CHECK(f == doctest::Approx(1.0));
}

TEST_CASE("generator is deterministic given the seed") {
  SyntheticConfig cfg = quiet_config();
  cfg.cloud_event_rate = 30.0;
  cfg.measurement_noise_sigma = 3.0;
  cfg.feature_noise_sigma = 0.05;
  const Episode a = generate_synthetic(cfg, 3);
  const Episode b = generate_synthetic(cfg, 3);
  CHECK(a.irradiance.values == b.irradiance.values);
  CHECK(a.features.rows == b.features.rows);

  const Episode c = generate_synthetic(cfg, 4);  // different day, different draw
  CHECK(a.irradiance.values != c.irradiance.values);
}

TEST_CASE("noiseless features equal the future occlusion factor exactly") {
  SyntheticConfig cfg = quiet_config();
  cfg.feature_lead_times = {60.0};
  // One trapezoid of depth 0.5 centered mid-day.
  const std::vector<CloudEvent> events = {{350.0, 0.5, 30.0, 60.0}};
  Rng rng(1);
  const Episode ep = generate_from_events(cfg, events, rng, 0);

  const double last_sample_t = (ep.irradiance.size() - 1) * cfg.dt;
  for (int t = 0; t < ep.irradiance.size(); ++t) {
    const double ahead = t * cfg.dt + 60.0;
    // The tail rule: leads past the day end repeat the last sample's value.
    const double expect = ahead >= cfg.day_length ? occlusion_at(events, last_sample_t)
                                                  : occlusion_at(events, ahead);
    CHECK(ep.features.rows[t][0] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("occlusion factor from a hand-built event") {
  // depth 0.5, edges 30 s, plateau 60 s, centered at 350 s:
  // full occlusion on [320, 380], linear edges outside.
  const std::vector<CloudEvent> events = {{350.0, 0.5, 30.0, 60.0}};
  CHECK(occlusion_at(events, 350.0) == doctest::Approx(0.5));
  CHECK(occlusion_at(events, 320.0) == doctest::Approx(0.5));
  CHECK(occlusion_at(events, 380.0) == doctest::Approx(0.5));
  CHECK(occlusion_at(events, 305.0) == doctest::Approx(0.75));  // halfway up the edge
  CHECK(occlusion_at(events, 290.0) == doctest::Approx(1.0));
  CHECK(occlusion_at(events, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("synthetic invariants over random seeds") {
  SyntheticConfig cfg = quiet_config();
  cfg.cloud_event_rate = 40.0;
  cfg.measurement_noise_sigma = 2.0;
  cfg.feature_noise_sigma = 0.1;
  for (int day = 0; day < 10; ++day) {
    const Episode ep = generate_synthetic(cfg, day);
    CHECK(ep.irradiance.size() == ep.features.size());
    for (int t = 0; t < ep.irradiance.size(); ++t) {
      const double env = clearsky_envelope(cfg, t * cfg.dt);
      CHECK(ep.irradiance.values[t] >= 0.0);
      CHECK(ep.irradiance.values[t] <= env + 3.0 * cfg.measurement_noise_sigma + 1e-9);
      for (double f : ep.features.rows[t]) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
    }
  }
}

TEST_CASE("csv round trip and rejection paths") {
  TempDir tmp;
  SUBCASE("3 rows at uniform spacing") {
    const fs::path p = tmp.path / "ok.csv";
    std::ofstream(p) << "0,5\n7,6\n14,7\n";
    const IrradianceSeries s = load_csv(p);
    CHECK(s.dt == doctest::Approx(7.0));
    CHECK(s.size() == 3);
    CHECK(s.values[2] == doctest::Approx(7.0));
  }
  SUBCASE("non-uniform timestamps are rejected with the line number") {
    const fs::path p = tmp.path / "bad_dt.csv";
    std::ofstream(p) << "0,5\n7,6\n14,7\n22,8\n";
    CHECK_THROWS_WITH_AS(load_csv(p), doctest::Contains(":4"), IoError);
  }
  SUBCASE("negative irradiance is rejected") {
    const fs::path p = tmp.path / "neg.csv";
    std::ofstream(p) << "0,5\n7,-5\n";
    CHECK_THROWS_WITH_AS(load_csv(p), doctest::Contains("negative"), IoError);
  }
  SUBCASE("save then load round trips") {
    SyntheticConfig cfg = quiet_config();
    cfg.cloud_event_rate = 25.0;
    cfg.measurement_noise_sigma = 1.0;
    const Episode ep = generate_synthetic(cfg, 1);
    const fs::path p = tmp.path / "day.csv";
    const fs::path pf = tmp.path / "day.features.csv";
    save_csv(ep.irradiance, p);
    save_features_csv(ep.irradiance, ep.features, pf);
    const IrradianceSeries s2 = load_csv(p);
    CHECK(s2.values == ep.irradiance.values);
    CHECK(s2.dt == doctest::Approx(ep.irradiance.dt));
    const FeatureSeries f2 = load_features_csv(pf, s2);
    CHECK(f2.rows == ep.features.rows);
    CHECK(f2.lead_times == ep.features.lead_times);
  }
}

TEST_CASE("split_days") {
  std::vector<int> ids20(20), ids256(256);
  for (int i = 0; i < 20; ++i) ids20[i] = i;
  for (int i = 0; i < 256; ++i) ids256[i] = i;

  SUBCASE("floor arithmetic at 20 and 256 days") {
    const DatasetSplit s20 = split_days(ids20, {0.70, 0.15, 0.15}, 1);
    CHECK(s20.train.size() == 14);
    CHECK(s20.validation.size() == 3);
    CHECK(s20.test.size() == 3);

    const DatasetSplit s256 = split_days(ids256, {0.70, 0.15, 0.15}, 1);
    CHECK(s256.train.size() == 179);
    CHECK(s256.validation.size() == 38);
    CHECK(s256.test.size() == 39);
  }
  SUBCASE("same seed, same split") {
    const DatasetSplit a = split_days(ids20, {0.70, 0.15, 0.15}, 9);
    const DatasetSplit b = split_days(ids20, {0.70, 0.15, 0.15}, 9);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
  }
  SUBCASE("partition: disjoint and jointly exhaustive") {
    const DatasetSplit s = split_days(ids20, {0.70, 0.15, 0.15}, 33);
    std::vector<int> all;
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.validation.begin(), s.validation.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    CHECK(all == ids20);
  }
  SUBCASE("fewer than 3 days is rejected") {
    CHECK_THROWS_AS(split_days({1, 2}, {0.70, 0.15, 0.15}, 1), ConfigError);
  }
}

TEST_CASE("normalization") {
  const NormalizationSpec spec{0.0, 800.0};
  CHECK(spec.normalize(0.0) == 0.0);
  CHECK(spec.normalize(800.0) == 1.0);
  CHECK(NormalizationSpec{0.0, 1000.0}.normalize(500.0) == doctest::Approx(0.5));
  // Out-of-range test values stay unclipped.
  CHECK(spec.normalize(1000.0) == doctest::Approx(1.25));

  CHECK_THROWS_AS((NormalizationSpec{5.0, 5.0}.validate()), ConfigError);

  SUBCASE("normalize then denormalize is the identity") {
    Rng rng(4);
    const NormalizationSpec r{12.5, 931.0};
    for (int i = 0; i < 500; ++i) {
      const double v = rng.uniform(-100.0, 1200.0);
      CHECK(r.denormalize(r.normalize(v)) ==
            doctest::Approx(v).epsilon(1e-12));
    }
  }
}
