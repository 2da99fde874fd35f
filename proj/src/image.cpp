#include "textsculpt/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>

#include "textsculpt/error.hpp"

namespace textsculpt {

Image::Image(int width, int height, Rgba fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidArgument, "negative image dimensions");
  data_.resize(static_cast<std::size_t>(width) * height * 4);
  for (std::size_t i = 0; i < data_.size(); i += 4) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
    data_[i + 3] = fill.a;
  }
}

void BinaryMask::fill(const Rect& r) {
  const Rect c = r.clamped(size());
  for (int y = c.y; y < c.bottom(); ++y)
    std::memset(&data_[static_cast<std::size_t>(y) * width_ + c.x], 1, static_cast<std::size_t>(c.w));
}

long long BinaryMask::count() const {
  long long n = 0;
  for (auto v : data_) n += v;
  return n;
}

std::vector<double> to_luma(const Image& img) {
  std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* p = &bytes[i * 4];
    out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

Image crop(const Image& img, const Rect& region) {
  const Rect c = region.clamped(img.size());
  Image out(c.w, c.h);
  for (int y = 0; y < c.h; ++y)
    for (int x = 0; x < c.w; ++x) out.set(x, y, img.at(c.x + x, c.y + y));
  return out;
}

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  // Locals touched after setjmp must not be modified between setjmp and longjmp.
  Image* volatile result = nullptr;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    delete result;
    throw Error(ErrorCode::Io, std::string("jpeg decode failed: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  result = new Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(cinfo.output_width) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (int x = 0; x < result->width(); ++x)
      result->set(x, y, {row[x * 3], row[x * 3 + 1], row[x * 3 + 2], 255});
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  Image out = std::move(*result);
  delete result;
  return out;
}

}  // namespace

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw Error(ErrorCode::Io, std::string("png decode failed: ") + img.message);
  img.format = PNG_FORMAT_RGBA;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.bytes().data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::Io, std::string("png decode failed: ") + img.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGBA;
  img.flags = PNG_IMAGE_FLAG_FAST;
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(img);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.bytes().data(), 0, nullptr))
    throw Error(ErrorCode::Io, std::string("png encode failed: ") + img.message);
  out.resize(size);
  return out;
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw Error(ErrorCode::Io, "unsupported image format: " + path.string());
}

void write_png(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Size read_image_size(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_png(bytes)) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
      throw Error(ErrorCode::Io, std::string("png header: ") + img.message);
    Size s{static_cast<int>(img.width), static_cast<int>(img.height)};
    png_image_free(&img);
    return s;
  }
  if (is_jpeg(bytes)) return decode_jpeg(bytes).size();
  throw Error(ErrorCode::Io, "unsupported image format: " + path.string());
}

}  // namespace textsculpt
