#include "lesionkit/codec.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

// jpeglib.h needs size_t and FILE declared first.
#include <jerror.h>
#include <jpeglib.h>

namespace lesion {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && std::memcmp(b.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

// Walks the chunk list so that truncation and framing errors can be reported
// with a byte offset; libpng itself does not expose one.
void check_png_framing(std::span<const std::uint8_t> b) {
  std::size_t pos = 8;
  bool seen_header = false;
  while (true) {
    if (pos + 8 > b.size()) throw DecodeError("truncated PNG chunk header", pos);
    const std::uint32_t length = read_be32(b.data() + pos);
    char type[5] = {0, 0, 0, 0, 0};
    std::memcpy(type, b.data() + pos + 4, 4);
    if (length > 0x7fffffffu) throw DecodeError("invalid PNG chunk length", pos);
    if (!seen_header && std::strcmp(type, "IHDR") != 0)
      throw DecodeError("PNG stream does not start with IHDR", pos);
    seen_header = true;
    const std::size_t end = pos + 12 + static_cast<std::size_t>(length);
    if (end > b.size()) throw DecodeError(std::string("truncated PNG chunk ") + type, b.size());
    pos = end;
    if (std::strcmp(type, "IEND") == 0) return;
  }
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  check_png_framing(bytes);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeError(std::string("PNG header: ") + image.message, 8);
  // Read with alpha and drop it: the color channels stay as stored.
  image.format = PNG_FORMAT_RGBA;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw DecodeError("PNG has zero dimension", 16);
  }
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("PNG data: " + msg, bytes.size());
  }
  std::vector<std::uint8_t> rgb(rgba.size() / 4 * 3);
  for (std::size_t i = 0, j = 0; i < rgba.size(); i += 4, j += 3) {
    rgb[j] = rgba[i];
    rgb[j + 1] = rgba[i + 1];
    rgb[j + 2] = rgba[i + 2];
  }
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(rgb));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
  bool unsupported;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_emit_message(j_common_ptr cinfo, int level) {
  // Premature end of data is only a warning for libjpeg; treat it as fatal.
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) jpeg_error_exit(cinfo);
}

// Kept free of non-trivial locals: longjmp skips destructors.
bool run_jpeg_decode(jpeg_decompress_struct* cinfo, JpegErrorManager* err,
                     const std::uint8_t* data, std::size_t size, std::uint8_t** out, int* w,
                     int* h) {
  if (setjmp(err->jump)) return false;
  jpeg_create_decompress(cinfo);
  jpeg_mem_src(cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(cinfo, TRUE);
  if (cinfo->jpeg_color_space == JCS_CMYK || cinfo->jpeg_color_space == JCS_YCCK) {
    err->unsupported = true;
    std::snprintf(err->message, sizeof err->message, "CMYK/YCCK JPEG is not supported");
    return false;
  }
  cinfo->out_color_space = JCS_RGB;
  jpeg_start_decompress(cinfo);
  *w = static_cast<int>(cinfo->output_width);
  *h = static_cast<int>(cinfo->output_height);
  const std::size_t stride = static_cast<std::size_t>(*w) * 3;
  *out = static_cast<std::uint8_t*>(std::malloc(stride * static_cast<std::size_t>(*h)));
  while (cinfo->output_scanline < cinfo->output_height) {
    JSAMPROW row = *out + stride * cinfo->output_scanline;
    jpeg_read_scanlines(cinfo, &row, 1);
  }
  jpeg_finish_decompress(cinfo);
  return true;
}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  std::memset(&err, 0, sizeof err);
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  std::uint8_t* pixels = nullptr;
  int w = 0, h = 0;
  const bool ok = run_jpeg_decode(&cinfo, &err, bytes.data(), bytes.size(), &pixels, &w, &h);
  const std::size_t offset =
      cinfo.src ? static_cast<std::size_t>(cinfo.src->next_input_byte - bytes.data()) : 0;
  jpeg_destroy_decompress(&cinfo);
  if (!ok) {
    std::free(pixels);
    if (err.unsupported) throw UnsupportedFormatError(err.message);
    throw DecodeError(std::string("JPEG: ") + err.message, offset);
  }
  std::vector<std::uint8_t> buffer(pixels, pixels + static_cast<std::size_t>(w) * h * 3);
  std::free(pixels);
  return RasterImage(w, h, std::move(buffer));
}

std::vector<std::uint8_t> write_png(const void* data, int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, data, 0, nullptr))
    throw Error(std::string("PNG encode: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, data, 0, nullptr))
    throw Error(std::string("PNG encode: ") + image.message);
  out.resize(size);
  return out;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw UnsupportedFormatError("stream is neither PNG nor JPEG");
}

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  const RasterImage img = decode_image(bytes);
  BinaryMask mask(img.width(), img.height());
  const auto b = img.bytes();
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = (b[3 * i] | b[3 * i + 1] | b[3 * i + 2]) != 0 ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  return write_png(img.bytes().data(), img.width(), img.height(), PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  return write_png(gray.data(), mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RasterImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

BinaryMask load_mask(const std::filesystem::path& path) { return decode_mask(read_file(path)); }

}  // namespace lesion
