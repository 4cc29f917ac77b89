#pragma once

#include <string>

#include "pareidolia/types.hpp"

namespace pareidolia::pnm {

/// Binary PGM (P5, 1 channel) or PPM (P6, 3 channels), 8-bit maxval.
std::string encode(const ImageU8& img);

/// Decodes binary P5/P6 with maxval <= 255.
ImageU8 decode(const std::string& bytes);

ImageU8 read_file(const std::string& path);

}  // namespace pareidolia::pnm
