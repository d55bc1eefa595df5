#include "ramplight/imgpre.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ramplight/common.hpp"

namespace ramplight {

ImageBuffer ImageBuffer::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.data.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

ImageBuffer apply_mask(const ImageBuffer& img, const Mask& mask) {
  if (img.width != mask.width || img.height != mask.height)
    throw ConfigError("apply_mask: mask dimensions do not match image");
  ImageBuffer out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask.keep[static_cast<std::size_t>(y) * mask.width + x]) {
        std::uint8_t* p = out.px(x, y);
        p[0] = p[1] = p[2] = 0;
      }
    }
  }
  return out;
}

ImageBuffer crop_centered(const ImageBuffer& img, int cx, int cy, int size) {
  if (size <= 0 || size % 2 != 0) throw ConfigError("crop_centered: size must be even and > 0");
  ImageBuffer out = ImageBuffer::filled(size, size, 0, 0, 0);
  const int half = size / 2;
  for (int y = 0; y < size; ++y) {
    const int sy = cy - half + y;
    if (sy < 0 || sy >= img.height) continue;
    for (int x = 0; x < size; ++x) {
      const int sx = cx - half + x;
      if (sx < 0 || sx >= img.width) continue;
      const std::uint8_t* src = img.px(sx, sy);
      std::uint8_t* dst = out.px(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

ImageBuffer downsample2(const ImageBuffer& img) {
  if (img.width % 2 != 0 || img.height % 2 != 0)
    throw ConfigError("downsample2: dimensions must be even");
  ImageBuffer out;
  out.width = img.width / 2;
  out.height = img.height / 2;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::uint8_t* p00 = img.px(2 * x, 2 * y);
      const std::uint8_t* p10 = img.px(2 * x + 1, 2 * y);
      const std::uint8_t* p01 = img.px(2 * x, 2 * y + 1);
      const std::uint8_t* p11 = img.px(2 * x + 1, 2 * y + 1);
      std::uint8_t* dst = out.px(x, y);
      for (int c = 0; c < 3; ++c) {
        const int sum = p00[c] + p10[c] + p01[c] + p11[c];
        dst[c] = static_cast<std::uint8_t>((sum + 2) / 4);  // mean, half rounds up
      }
    }
  }
  return out;
}

FloatImage pixel_normalize(const ImageBuffer& img) {
  FloatImage out;
  out.width = img.width;
  out.height = img.height;
  out.data.resize(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] / 255.0;
  return out;
}

std::array<double, 3> mean_intensity(const ImageBuffer& img) {
  std::array<double, 3> sum = {0.0, 0.0, 0.0};
  std::size_t count = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.is_black(x, y)) continue;
      const std::uint8_t* p = img.px(x, y);
      sum[0] += p[0];
      sum[1] += p[1];
      sum[2] += p[2];
      ++count;
    }
  }
  if (count == 0) throw NumericError("mean_intensity: no unmasked pixels");
  for (double& s : sum) s /= static_cast<double>(count);
  return sum;
}

ImageBuffer stabilize_colors(const ImageBuffer& img, ColorStabilizerState& state) {
  const std::array<double, 3> intensity = mean_intensity(img);
  if (!state.initialized) {
    state.mu = intensity;
    state.initialized = true;
  } else {
    for (int c = 0; c < 3; ++c) state.mu[c] = 0.9 * state.mu[c] + 0.1 * intensity[c];
  }
  std::array<double, 3> scale;
  for (int c = 0; c < 3; ++c) scale[c] = state.mu[c] / intensity[c];

  ImageBuffer out = img;
  for (std::size_t i = 0; i < out.data.size(); i += 3) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::lround(out.data[i + c] * scale[c]);
      out.data[i + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

// --- Netpbm io -------------------------------------------------------------

namespace {

int read_pnm_token(std::istream& in, const std::filesystem::path& path) {
  // Skips whitespace and `#` comment lines the way the format allows.
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#')
      while (c != EOF && c != '\n') c = in.get();
    c = in.get();
  }
  if (c == EOF) throw IoError(path.string() + ": truncated header");
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError(path.string() + ": malformed header");
  return value;
}

}  // namespace

ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '6') throw IoError(path.string() + ": not a binary PPM (P6)");
  ImageBuffer img;
  img.width = read_pnm_token(in, path);
  img.height = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (maxval != 255) throw IoError(path.string() + ": only maxval 255 is supported");
  if (img.width <= 0 || img.height <= 0) throw IoError(path.string() + ": bad dimensions");
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw IoError(path.string() + ": truncated pixel data");
  return img;
}

void write_ppm(const ImageBuffer& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Mask read_pgm_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') throw IoError(path.string() + ": not a binary PGM (P5)");
  Mask mask;
  mask.width = read_pnm_token(in, path);
  mask.height = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (maxval != 255) throw IoError(path.string() + ": only maxval 255 is supported");
  mask.keep.resize(static_cast<std::size_t>(mask.width) * mask.height);
  in.read(reinterpret_cast<char*>(mask.keep.data()),
          static_cast<std::streamsize>(mask.keep.size()));
  if (in.gcount() != static_cast<std::streamsize>(mask.keep.size()))
    throw IoError(path.string() + ": truncated pixel data");
  return mask;
}

void write_pgm_mask(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<std::uint8_t> bytes(mask.keep.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.keep[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ramplight
