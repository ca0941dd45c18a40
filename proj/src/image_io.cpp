#include "vinebud/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include <jpeglib.h>
#include <png.h>

namespace vinebud {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && std::memcmp(b.data(), kPngSignature, 8) == 0;
}
bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// ---------------------------------------------------------------- PNG read

struct PngSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
  std::jmp_buf jump;
  char message[256];
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->size) {
    std::snprintf(src->message, sizeof src->message, "truncated PNG stream");
    src->pos = src->size;
    std::longjmp(src->jump, 1);
  }
  std::memcpy(out, src->data + src->pos, n);
  src->pos += n;
}

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* src = static_cast<PngSource*>(png_get_error_ptr(png));
  std::snprintf(src->message, sizeof src->message, "PNG error: %s", msg);
  std::longjmp(src->jump, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  // Every object with a destructor lives above the setjmp point.
  PngSource src{bytes.data(), bytes.size(), 0, {}, {}};
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &src, png_error_cb, png_warning_cb);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("cannot allocate PNG decoder", 0);
  }
  png_uint_32 width = 0, height = 0;

  if (setjmp(src.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError(src.message, src.pos);
  }
  png_set_read_fn(png, &src, png_read_cb);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const png_size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RgbImage img(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 y = 0; y < height; ++y)
    for (png_uint_32 x = 0; x < width; ++x) {
      const png_byte* p = rows[y] + 3 * x;
      img.r(y, x) = p[0];
      img.g(y, x) = p[1];
      img.b(y, x) = p[2];
    }
  return img;
}

// ---------------------------------------------------------------- PNG write

void png_write_cb(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}
void png_flush_cb(png_structp) {}

struct PngSink {
  std::jmp_buf jump;
  char message[256];
};

void png_write_error_cb(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "PNG encode error: %s", msg);
  std::longjmp(sink->jump, 1);
}

// rows: packed scanlines already in the target bit depth.
Bytes write_png(int width, int height, int bit_depth, int color_type,
                const std::vector<std::vector<png_byte>>& rows) {
  Bytes out;
  PngSink sink{};
  std::vector<png_const_bytep> row_ptrs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) row_ptrs[i] = rows[i].data();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_write_error_cb, png_warning_cb);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("cannot allocate PNG encoder");
  }
  if (setjmp(sink.jump)) {
    png_destroy_write_struct(&png, &info);
    throw Error(sink.message);
  }
  png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_rows(png, const_cast<png_bytepp>(row_ptrs.data()), static_cast<png_uint_32>(rows.size()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

// ---------------------------------------------------------------- JPEG

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit_cb(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent_cb(j_common_ptr, int) {}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  std::vector<std::uint8_t> pixels;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit_cb;
  jerr.pub.emit_message = jpeg_silent_cb;

  if (setjmp(jerr.jump)) {
    const std::size_t at = cinfo.src ? bytes.size() - cinfo.src->bytes_in_buffer : 0;
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("JPEG error: ") + jerr.message, at);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t width = cinfo.output_width, height = cinfo.output_height;
  pixels.resize(width * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  // libjpeg pads a truncated stream with a fake EOI and only warns about it.
  const bool truncated = jerr.pub.num_warnings > 0 && cinfo.src->bytes_in_buffer == 0;
  const std::size_t consumed = bytes.size() - cinfo.src->bytes_in_buffer;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (truncated) throw DecodeError("truncated JPEG stream", consumed);

  RgbImage img(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const std::uint8_t* p = pixels.data() + (y * width + x) * 3;
      img.r(y, x) = p[0];
      img.g(y, x) = p[1];
      img.b(y, x) = p[2];
    }
  return img;
}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw DecodeError("empty image stream", 0);
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw DecodeError("unrecognised image signature", 0);
}

RgbImage read_image(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what(), e.offset);
  }
}

Bytes encode_png(const RgbImage& img) {
  std::vector<std::vector<png_byte>> rows(img.height(), std::vector<png_byte>(3 * img.width()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      rows[y][3 * x] = img.r(y, x);
      rows[y][3 * x + 1] = img.g(y, x);
      rows[y][3 * x + 2] = img.b(y, x);
    }
  return write_png(img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, rows);
}

Bytes encode_png(const Plane<std::uint8_t>& gray) {
  const int w = static_cast<int>(gray.cols()), h = static_cast<int>(gray.rows());
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) rows[y][x] = gray(y, x);
  return write_png(w, h, 8, PNG_COLOR_TYPE_GRAY, rows);
}

Bytes encode_mask_png(const Mask& mask) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>((w + 7) / 8, 0));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(y, x)) rows[y][x / 8] |= static_cast<png_byte>(0x80u >> (x % 8));
  return write_png(w, h, 1, PNG_COLOR_TYPE_GRAY, rows);
}

Mask decode_mask_png(std::span<const std::uint8_t> bytes) {
  const RgbImage img = decode_image(bytes);
  return (img.r > 127).cast<std::uint8_t>();
}

Bytes encode_jpeg(const RgbImage& img, int quality) {
  jpeg_compress_struct cinfo{};
  JpegErrorManager jerr{};
  std::vector<std::uint8_t> row(3 * static_cast<std::size_t>(img.width()));
  Bytes result;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit_cb;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(out);
    throw Error(std::string("JPEG encode error: ") + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width(); ++x) {
      row[3 * x] = img.r(y, x);
      row[3 * x + 1] = img.g(y, x);
      row[3 * x + 2] = img.b(y, x);
    }
    JSAMPROW ptr = row.data();
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  result.assign(out, out + out_size);
  jpeg_destroy_compress(&cinfo);
  std::free(out);
  return result;
}

RgbImage to_rgb(const GrayImage& gray) {
  RgbImage img;
  img.r = (gray.max(0.0).min(1.0) * 255.0).round().cast<std::uint8_t>();
  img.g = img.r;
  img.b = img.r;
  return img;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace vinebud
