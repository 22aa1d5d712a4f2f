#pragma once

// PNG / JPEG codecs over in-memory buffers (libpng simplified API, libjpeg).

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <jerror.h>

#include "hypso/error.hpp"

namespace hypso {

using Bytes = std::vector<std::uint8_t>;

enum class RasterFormat { png, jpeg, unknown };

inline RasterFormat sniff_format(const Bytes& data) {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (data.size() >= 8 && std::memcmp(data.data(), kPng, 8) == 0) return RasterFormat::png;
  if (data.size() >= 3 && data[0] == 0xFF && data[1] == 0xD8 && data[2] == 0xFF) return RasterFormat::jpeg;
  return RasterFormat::unknown;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    detail::fail(Errc::file_not_found, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(Errc::io_error, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) detail::fail(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) detail::fail(Errc::io_error, "write failed: " + path.string());
}

// Interleaved 8-bit pixels, row-major.
struct Pixels8 {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;
};

struct Gray16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
};

namespace detail {

inline void decode_png(const Bytes& data, png_uint_32 format, int bytes_per_component, png_imagep image,
                       std::vector<std::uint8_t>& out) {
  std::memset(image, 0, sizeof(*image));
  image->version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(image, data.data(), data.size())) {
    std::string msg = image->message;
    png_image_free(image);
    fail(Errc::decode_error, "png: " + msg);
  }
  image->format = format;
  out.assign(PNG_IMAGE_SIZE(*image), 0);
  (void)bytes_per_component;
  if (!png_image_finish_read(image, nullptr, out.data(), 0, nullptr)) {
    std::string msg = image->message;
    png_image_free(image);
    fail(Errc::decode_error, "png: " + msg);
  }
}

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
  bool truncated;
};

extern "C" inline void jpeg_on_error(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, state->message);
  std::longjmp(state->jump, 1);
}

extern "C" inline void jpeg_on_message(j_common_ptr cinfo, int level) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) state->truncated = true;
}

// Only trivially destructible locals live in this frame; longjmp may skip it.
inline bool decode_jpeg_raw(const Bytes& data, Pixels8& out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorState err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_on_error;
  err.mgr.emit_message = jpeg_on_message;
  err.truncated = false;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = 3;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (err.truncated) {
    std::snprintf(message, JMSG_LENGTH_MAX, "premature end of JPEG data");
    return false;
  }
  return true;
}

}  // namespace detail

inline Pixels8 decode_rgb8(const Bytes& data) {
  Pixels8 out;
  switch (sniff_format(data)) {
    case RasterFormat::png: {
      png_image image;
      detail::decode_png(data, PNG_FORMAT_RGB, 1, &image, out.data);
      out.width = static_cast<int>(image.width);
      out.height = static_cast<int>(image.height);
      out.channels = 3;
      png_image_free(&image);
      break;
    }
    case RasterFormat::jpeg: {
      char message[JMSG_LENGTH_MAX];
      if (!detail::decode_jpeg_raw(data, out, message))
        detail::fail(Errc::decode_error, std::string("jpeg: ") + message);
      break;
    }
    case RasterFormat::unknown:
      detail::fail(Errc::unsupported_format, "not a PNG or JPEG stream");
  }
  if (out.width <= 0 || out.height <= 0) detail::fail(Errc::decode_error, "empty image");
  return out;
}

// 16-bit grayscale PNG samples, returned without any gamma conversion.
inline Gray16 decode_gray16(const Bytes& data) {
  if (sniff_format(data) != RasterFormat::png) detail::fail(Errc::unsupported_format, "heightmap must be a PNG");
  png_image image;
  std::vector<std::uint8_t> raw;
  detail::decode_png(data, PNG_FORMAT_LINEAR_Y, 2, &image, raw);
  Gray16 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  png_image_free(&image);
  out.data.resize(raw.size() / 2);
  std::memcpy(out.data.data(), raw.data(), out.data.size() * 2);
  return out;
}

// RGB (channels = 3) or RGBA (channels = 4); output bytes depend only on the pixels.
inline Bytes encode_png(const Pixels8& px) {
  if (px.channels != 3 && px.channels != 4) detail::fail(Errc::invalid_argument, "png: 3 or 4 channels");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(px.width);
  image.height = static_cast<png_uint_32>(px.height);
  image.format = px.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data.data(), 0, nullptr))
    detail::fail(Errc::io_error, std::string("png encode: ") + image.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data.data(), 0, nullptr))
    detail::fail(Errc::io_error, std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

inline Bytes encode_gray16(const Gray16& g) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(g.width);
  image.height = static_cast<png_uint_32>(g.height);
  image.format = PNG_FORMAT_LINEAR_Y;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, g.data.data(), 0, nullptr))
    detail::fail(Errc::io_error, std::string("png encode: ") + image.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, g.data.data(), 0, nullptr))
    detail::fail(Errc::io_error, std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

}  // namespace hypso
