#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselabel::imgio {

struct Gray8 {
  int width = 0, height = 0;
  std::vector<uint8_t> pixels;  // row-major
};

struct Gray16 {
  int width = 0, height = 0;
  std::vector<uint16_t> pixels;
};

struct Rgb8 {
  int width = 0, height = 0;
  std::vector<uint8_t> pixels;  // 3 bytes per pixel, row-major
};

void write_png(const std::string& path, const Gray8& img);
void write_png(const std::string& path, const Gray16& img);
void write_png(const std::string& path, const Rgb8& img);

/// Reads any PNG as 8-bit grayscale (color is converted, alpha stripped).
Gray8 read_png_gray8(const std::string& path);

/// Reads a 16-bit grayscale PNG; throws on other bit depths.
Gray16 read_png_gray16(const std::string& path);

/// Reads any PNG as 8-bit RGB.
Rgb8 read_png_rgb8(const std::string& path);

}  // namespace poselabel::imgio
