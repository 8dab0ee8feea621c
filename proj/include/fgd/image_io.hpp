#pragma once

#include <string>

#include "fgd/image.hpp"

// 8-bit image files <-> [-1, 1] buffers. Byte b maps to 2 b / 255 - 1;
// values are clamped to [-1, 1] and rounded to the nearest byte on write,
// so write(read(f)) reproduces f exactly.

namespace fgd {

double byte_to_unit(unsigned char b);
unsigned char unit_to_byte(double v);

/// PNG, 1-4 channels (gray, gray+alpha, RGB, RGBA). Palette, low-depth
/// and 16-bit files are converted on read. Writes carry no timestamps:
/// the same buffer always produces the same bytes.
ImageBuffer read_png(const std::string& path);
void write_png(const ImageBuffer& img, const std::string& path);

/// Binary PGM (P5, 1 channel) and PPM (P6, 3 channels), maxval 255.
ImageBuffer read_pnm(const std::string& path);
void write_pnm(const ImageBuffer& img, const std::string& path);

/// Dispatch on extension: .png, .pgm, .ppm.
ImageBuffer read_image(const std::string& path);
void write_image(const ImageBuffer& img, const std::string& path);

} // namespace fgd
