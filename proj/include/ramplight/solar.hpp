#pragma once

namespace ramplight {

struct SolarAngles {
  double azimuth_deg;    ///< from north, clockwise (east = 90)
  double elevation_deg;  ///< above the horizon
};

/// Compact closed-form solar ephemeris (PSA-style series expansion of the
/// sun's ecliptic coordinates). Accuracy is a few hundredths of a degree in
/// the 2000s, well inside the half-degree target.
SolarAngles solar_position(double epoch_seconds, double latitude_deg, double longitude_deg);

/// Upward-looking equidistant fisheye: pixel radius proportional to zenith
/// angle, with the horizon on the circle of radius_px.
struct FisheyeGeometry {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius_px = 0.0;
  double rotation_deg = 0.0;  ///< image rotation offset added to azimuth
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

struct PixelPos {
  double x;
  double y;
};

/// Projects a sky direction to image coordinates (x right, y down; azimuth 0
/// maps toward -y before rotation). Throws NumericError below the horizon.
PixelPos project_sky(const FisheyeGeometry& geom, double azimuth_deg, double elevation_deg);

/// Sun position at a time, through the ephemeris and the fisheye model.
PixelPos sun_pixel(double epoch_seconds, const FisheyeGeometry& geom);

}  // namespace ramplight
