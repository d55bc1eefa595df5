#include "ramplight/solar.hpp"

#include <cmath>
#include <cstdint>

#include "ramplight/common.hpp"

namespace ramplight {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRad = kPi / 180.0;

}  // namespace

SolarAngles solar_position(double epoch_seconds, double latitude_deg, double longitude_deg) {
  // Days since the J2000.0 epoch (2000-01-01 12:00 UT = unix 946728000).
  const double elapsed_days = (epoch_seconds - 946728000.0) / 86400.0;
  const double decimal_hours = std::fmod(epoch_seconds, 86400.0) / 3600.0;

  // Ecliptic coordinates of the sun.
  const double omega = 2.1429 - 0.0010394594 * elapsed_days;
  const double mean_longitude = 4.8950630 + 0.017202791698 * elapsed_days;
  const double mean_anomaly = 6.2400600 + 0.0172019699 * elapsed_days;
  const double ecliptic_longitude = mean_longitude + 0.03341607 * std::sin(mean_anomaly) +
                                    0.00034894 * std::sin(2.0 * mean_anomaly) - 0.0001134 -
                                    0.0000203 * std::sin(omega);
  const double obliquity = 0.4090928 - 6.2140e-9 * elapsed_days + 0.0000396 * std::cos(omega);

  // Celestial coordinates.
  const double sin_el = std::sin(ecliptic_longitude);
  double right_ascension = std::atan2(std::cos(obliquity) * sin_el, std::cos(ecliptic_longitude));
  if (right_ascension < 0.0) right_ascension += 2.0 * kPi;
  const double declination = std::asin(std::sin(obliquity) * sin_el);

  // Local horizontal coordinates.
  const double gmst = 6.6974243242 + 0.0657098283 * elapsed_days + decimal_hours;
  const double lmst = (gmst * 15.0 + longitude_deg) * kRad;
  const double hour_angle = lmst - right_ascension;
  const double lat = latitude_deg * kRad;

  double zenith = std::acos(std::cos(lat) * std::cos(hour_angle) * std::cos(declination) +
                            std::sin(declination) * std::sin(lat));
  double azimuth = std::atan2(-std::sin(hour_angle),
                              std::tan(declination) * std::cos(lat) -
                                  std::sin(lat) * std::cos(hour_angle));
  if (azimuth < 0.0) azimuth += 2.0 * kPi;

  // Parallax correction (earth radius / 1 AU).
  zenith += (6371.01 / 149597890.0) * std::sin(zenith);

  return {azimuth / kRad, 90.0 - zenith / kRad};
}

PixelPos project_sky(const FisheyeGeometry& geom, double azimuth_deg, double elevation_deg) {
  if (geom.radius_px <= 0.0) throw ConfigError("fisheye geometry: radius_px must be > 0");
  if (elevation_deg < 0.0)
    throw NumericError("project_sky: direction below the horizon");
  const double zenith = 90.0 - elevation_deg;
  const double rho = geom.radius_px * zenith / 90.0;
  const double theta = (azimuth_deg + geom.rotation_deg) * kRad;
  return {geom.center_x + rho * std::sin(theta), geom.center_y - rho * std::cos(theta)};
}

PixelPos sun_pixel(double epoch_seconds, const FisheyeGeometry& geom) {
  const SolarAngles sun = solar_position(epoch_seconds, geom.latitude_deg, geom.longitude_deg);
  if (sun.elevation_deg < 0.0) throw NumericError("sun_pixel: sun below the horizon");
  return project_sky(geom, sun.azimuth_deg, sun.elevation_deg);
}

}  // namespace ramplight
