#include "fgd/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include <png.h>

namespace fgd {

double byte_to_unit(unsigned char b) { return 2.0 * (b / 255.0) - 1.0; }

unsigned char unit_to_byte(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const double b = std::floor((v + 1.0) * 127.5 + 0.5);
  return static_cast<unsigned char>(std::clamp(b, 0.0, 255.0));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageBuffer from_interleaved(const std::vector<unsigned char>& bytes, int h, int w,
                             int c) {
  ImageBuffer img(h, w, c);
  for (int ch = 0; ch < c; ++ch) {
    double* plane = img.plane(ch);
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
      plane[p] = byte_to_unit(bytes[p * static_cast<std::size_t>(c) + ch]);
  }
  return img;
}

std::vector<unsigned char> to_interleaved(const ImageBuffer& img) {
  const int c = img.channels();
  std::vector<unsigned char> bytes(img.size());
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = img.plane(ch);
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
      bytes[p * static_cast<std::size_t>(c) + ch] = unit_to_byte(plane[p]);
  }
  return bytes;
}

std::string lower_ext(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

} // namespace

ImageBuffer read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("read_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("read_png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: failed to decode " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize everything to 8-bit packed channels.
  const png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int c = png_get_channels(png, info);
  if (h < 1 || w < 1 || c < 1 || c > 4) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: unsupported layout in " + path);
  }

  std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * c);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[static_cast<std::size_t>(y)] = bytes.data() + static_cast<std::size_t>(y) * w * c;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return from_interleaved(bytes, h, w, c);
}

void write_png(const ImageBuffer& img, const std::string& path) {
  if (img.empty()) throw std::invalid_argument("write_png: empty image");
  const int c = img.channels();
  int color_type;
  switch (c) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: throw std::invalid_argument("write_png: need 1-4 channels");
  }

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> bytes = to_interleaved(img);
  for (int y = 0; y < img.height(); ++y)
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * img.width() * c);
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

namespace {

int pnm_token(std::istream& in) {
  // Whitespace-separated decimal, '#' starts a comment to end of line.
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
    } else if (!std::isspace(ch)) {
      break;
    }
  }
  if (ch == EOF) throw std::runtime_error("read_pnm: truncated header");
  int value = 0;
  bool any = false;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    any = true;
    ch = in.get();
  }
  if (!any) throw std::runtime_error("read_pnm: malformed header");
  return value;
}

} // namespace

ImageBuffer read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pnm: cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  int channels;
  if (magic[0] == 'P' && magic[1] == '5')
    channels = 1;
  else if (magic[0] == 'P' && magic[1] == '6')
    channels = 3;
  else
    throw std::runtime_error("read_pnm: not a binary PGM/PPM: " + path);

  const int w = pnm_token(in);
  const int h = pnm_token(in);
  const int maxval = pnm_token(in);
  if (w < 1 || h < 1) throw std::runtime_error("read_pnm: bad dimensions in " + path);
  if (maxval != 255) throw std::runtime_error("read_pnm: only maxval 255 supported");
  // The maxval token consumed the single whitespace byte before the data.

  std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error("read_pnm: truncated pixel data in " + path);
  return from_interleaved(bytes, h, w, channels);
}

void write_pnm(const ImageBuffer& img, const std::string& path) {
  const char* magic;
  if (img.channels() == 1)
    magic = "P5";
  else if (img.channels() == 3)
    magic = "P6";
  else
    throw std::invalid_argument("write_pnm: need 1 (PGM) or 3 (PPM) channels");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pnm: cannot open " + path);
  out << magic << "\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> bytes = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write_pnm: write failed: " + path);
}

ImageBuffer read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw std::invalid_argument("read_image: unsupported extension: " + path);
}

void write_image(const ImageBuffer& img, const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return write_png(img, path);
  if (ext == ".pgm" || ext == ".ppm") return write_pnm(img, path);
  throw std::invalid_argument("write_image: unsupported extension: " + path);
}

} // namespace fgd
