#include "poselabel/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "poselabel/errors.hpp"

namespace poselabel::imgio {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(Errc::io, "cannot open " + path);
  return f;
}

void write_rows(const std::string& path, int width, int height, int bit_depth, int color_type,
                const std::vector<png_bytep>& rows) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, "png write error: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // host is little-endian, PNG is big-endian
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct Reader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FilePtr file;

  explicit Reader(const std::string& path) : file(open_file(path, "rb")) {
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
      throw Error(Errc::parse, "not a PNG file: " + path);
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(Errc::io, "png_create_read_struct failed");
    info = png_create_info_struct(png);
    if (!info) throw Error(Errc::io, "png_create_info_struct failed");
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
  }

  ~Reader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

}  // namespace

void write_png(const std::string& path, const Gray8& img) {
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.pixels.data() + size_t(y) * img.width);
  write_rows(path, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png(const std::string& path, const Gray16& img) {
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(
        reinterpret_cast<const png_byte*>(img.pixels.data() + size_t(y) * img.width));
  write_rows(path, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png(const std::string& path, const Rgb8& img) {
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.pixels.data() + size_t(y) * img.width * 3);
  write_rows(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

Gray8 read_png_gray8(const std::string& path) {
  Reader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw Error(Errc::parse, "png read error: " + path);
  png_read_info(r.png, r.info);
  png_set_expand(r.png);
  png_set_strip_alpha(r.png);
  png_set_strip_16(r.png);
  if (png_get_color_type(r.png, r.info) & PNG_COLOR_MASK_COLOR)
    png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
  png_read_update_info(r.png, r.info);
  Gray8 img;
  img.width = int(png_get_image_width(r.png, r.info));
  img.height = int(png_get_image_height(r.png, r.info));
  if (png_get_rowbytes(r.png, r.info) != size_t(img.width))
    throw Error(Errc::parse, "unexpected row size in " + path);
  img.pixels.resize(size_t(img.width) * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + size_t(y) * img.width;
  png_read_image(r.png, rows.data());
  return img;
}

Gray16 read_png_gray16(const std::string& path) {
  Reader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw Error(Errc::parse, "png read error: " + path);
  png_read_info(r.png, r.info);
  if (png_get_bit_depth(r.png, r.info) != 16 ||
      png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY)
    throw Error(Errc::parse, "expected 16-bit grayscale PNG: " + path);
  png_set_swap(r.png);
  png_read_update_info(r.png, r.info);
  Gray16 img;
  img.width = int(png_get_image_width(r.png, r.info));
  img.height = int(png_get_image_height(r.png, r.info));
  img.pixels.resize(size_t(img.width) * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = reinterpret_cast<png_byte*>(img.pixels.data() + size_t(y) * img.width);
  png_read_image(r.png, rows.data());
  return img;
}

Rgb8 read_png_rgb8(const std::string& path) {
  Reader r(path);
  if (setjmp(png_jmpbuf(r.png))) throw Error(Errc::parse, "png read error: " + path);
  png_read_info(r.png, r.info);
  png_set_expand(r.png);
  png_set_strip_alpha(r.png);
  png_set_strip_16(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);
  Rgb8 img;
  img.width = int(png_get_image_width(r.png, r.info));
  img.height = int(png_get_image_height(r.png, r.info));
  if (png_get_rowbytes(r.png, r.info) != size_t(img.width) * 3)
    throw Error(Errc::parse, "unexpected row size in " + path);
  img.pixels.resize(size_t(img.width) * img.height * 3);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + size_t(y) * img.width * 3;
  png_read_image(r.png, rows.data());
  return img;
}

}  // namespace poselabel::imgio
