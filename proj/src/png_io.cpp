#include "cyclebal/io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "cyclebal/core/error.hpp"

namespace cyclebal::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void pngErrorFn(png_structp png, png_const_charp msg) {
  (void)png;
  throw DataError(std::string("png: ") + msg);
}

void pngWarnFn(png_structp, png_const_charp) {}

}  // namespace

Tensor<float> readPng(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("png: cannot open '" + path + "'");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, pngErrorFn, pngWarnFn);
  if (!png) throw DataError("png: failed to create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png: failed to create info struct");
  }

  try {
    png_init_io(png, f.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int colorType = png_get_color_type(png, info);
    int bitDepth = png_get_bit_depth(png, info);

    if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    bitDepth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3)
      throw DataError("png: unsupported channel count " + std::to_string(channels) +
                      " in '" + path + "'");

    const size_t rowBytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raw(rowBytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowBytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor<float> out({channels, static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w)});
    const float scale = bitDepth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
    for (png_uint_32 y = 0; y < h; ++y) {
      const unsigned char* row = raw.data() + y * rowBytes;
      for (png_uint_32 x = 0; x < w; ++x) {
        for (int c = 0; c < channels; ++c) {
          float v;
          if (bitDepth == 16) {
            // PNG stores 16-bit samples big-endian
            const size_t idx = (x * static_cast<size_t>(channels) + static_cast<size_t>(c)) * 2;
            v = static_cast<float>((row[idx] << 8) | row[idx + 1]) * scale;
          } else {
            v = static_cast<float>(row[x * static_cast<size_t>(channels) + static_cast<size_t>(c)]) * scale;
          }
          out.data()[(static_cast<Eigen::Index>(c) * h + y) * w + x] = v;
        }
      }
    }
    return out;
  } catch (...) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw;
  }
}

void writePng(const std::string& path, const Tensor<float>& image, int bitDepth) {
  if (image.rank() != 3)
    throw DataError("png: expected (C, H, W) tensor");
  const Eigen::Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (c != 1 && c != 3) throw DataError("png: channel count must be 1 or 3");
  if (bitDepth != 8 && bitDepth != 16) throw DataError("png: bit depth must be 8 or 16");
  if (!image.allFinite()) throw DataError("png: non-finite pixel values");

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("png: cannot open '" + path + "' for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, pngErrorFn, pngWarnFn);
  if (!png) throw DataError("png: failed to create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png: failed to create info struct");
  }

  try {
    png_init_io(png, f.get());
    // fixed compression settings keep output byte-identical across runs
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
                 bitDepth, c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double maxVal = bitDepth == 16 ? 65535.0 : 255.0;
    const size_t sampleBytes = bitDepth == 16 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<size_t>(w) * static_cast<size_t>(c) * sampleBytes);
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) {
        for (Eigen::Index ch = 0; ch < c; ++ch) {
          double v = image.data()[(ch * h + y) * w + x];
          v = std::min(1.0, std::max(0.0, v));
          const auto q = static_cast<unsigned>(std::lround(v * maxVal));
          const size_t idx = (static_cast<size_t>(x) * static_cast<size_t>(c) + static_cast<size_t>(ch)) * sampleBytes;
          if (bitDepth == 16) {
            row[idx] = static_cast<unsigned char>(q >> 8);
            row[idx + 1] = static_cast<unsigned char>(q & 0xff);
          } else {
            row[idx] = static_cast<unsigned char>(q);
          }
        }
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  } catch (...) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    throw;
  }
}

}  // namespace cyclebal::io
