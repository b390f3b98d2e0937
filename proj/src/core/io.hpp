#ifndef SEGOPT_CORE_IO_HPP
#define SEGOPT_CORE_IO_HPP

#include <string>

#include "core/grid.hpp"

namespace segopt {

/// Loads a binary PGM (P5, 1 channel) or PPM (P6, 3 channels) image.
/// Only maxval 255 is supported.
Image load_image(const std::string& path);

/// Saves as P5 (1 channel) or P6 (3 channels); intensities are rounded and
/// clamped to bytes.
void save_image(const Image& img, const std::string& path);

/// Masks travel as P5 files with values in {0, 255}.
Labeling load_mask(const std::string& path);
void save_mask(const Labeling& s, const std::string& path);

/// Flat binary field dump: magic "SFLD", u32 width, u32 height, then
/// little-endian 64-bit reals row-major.
ScalarField load_field(const std::string& path);
void save_field(const ScalarField& f, const std::string& path);

/// Plain-text histogram: comment header, then one "bin_index value" line per
/// bin, where bin_index = channel * bins + bin.
Histogram load_histogram(const std::string& path);
void save_histogram(const Histogram& h, const std::string& path);

}  // namespace segopt

#endif
