#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace ramplight {

/// Interleaved 8-bit RGB raster, row major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  static ImageBuffer filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::uint8_t* px(int x, int y) {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool is_black(int x, int y) const {
    const std::uint8_t* p = px(x, y);
    return p[0] == 0 && p[1] == 0 && p[2] == 0;
  }
};

/// Unit-interval image produced by pixel_normalize.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> keep;  // nonzero = keep
};

/// Masked-out pixels become (0,0,0); dimensions must match.
ImageBuffer apply_mask(const ImageBuffer& img, const Mask& mask);

/// size x size window centered at (cx, cy); regions outside the source fill
/// with black. size must be even and positive.
ImageBuffer crop_centered(const ImageBuffer& img, int cx, int cy, int size);

/// Halves both dimensions; each output sample is the mean of its 2x2 block,
/// rounded half-up. Requires even dimensions.
ImageBuffer downsample2(const ImageBuffer& img);

/// Divides every sample by 255.
FloatImage pixel_normalize(const ImageBuffer& img);

/// Low-pass state of the color stabilizer: per-channel mean intensity.
struct ColorStabilizerState {
  bool initialized = false;
  std::array<double, 3> mu = {0.0, 0.0, 0.0};
};

/// Per-channel mean over pixels that are not pure black (the mask fill).
/// Throws NumericError when every pixel is black.
std::array<double, 3> mean_intensity(const ImageBuffer& img);

/// mu_t = 0.9 mu_{t-1} + 0.1 i_t, every pixel scaled by mu_t / i_t and
/// clipped to [0, 255]. The first frame initializes mu to its own intensity.
/// Must be applied serially per camera stream.
ImageBuffer stabilize_colors(const ImageBuffer& img, ColorStabilizerState& state);

// Binary PPM (P6) / PGM (P5) io, maxval 255. The mask convention is 0 =
// masked out, nonzero = keep.
ImageBuffer read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageBuffer& img, const std::filesystem::path& path);
Mask read_pgm_mask(const std::filesystem::path& path);
void write_pgm_mask(const Mask& mask, const std::filesystem::path& path);

}  // namespace ramplight
