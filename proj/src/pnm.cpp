#include "pareidolia/pnm.hpp"

#include <fstream>
#include <sstream>

namespace pareidolia::pnm {

std::string encode(const ImageU8& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw parameter_error("pnm: only 1- or 3-channel images");
  }
  if (img.width < 1 || img.height < 1 ||
      img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw parameter_error("pnm: malformed image");
  }
  std::ostringstream out;
  out << (img.channels == 1 ? "P5" : "P6") << '\n'
      << img.width << ' ' << img.height << '\n'
      << 255 << '\n';
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  return out.str();
}

namespace {

/// Next whitespace-delimited token, skipping '#' comments.
std::string next_token(std::istringstream& in) {
  std::string tok;
  for (;;) {
    if (!(in >> tok)) throw data_error("pnm: truncated header");
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
}

int parse_int(const std::string& tok) {
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw data_error("pnm: bad header token '" + tok + "'");
  }
}

}  // namespace

ImageU8 decode(const std::string& bytes) {
  if (bytes.size() < 2) throw data_error("pnm: too short");
  const std::string magic = bytes.substr(0, 2);
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw data_error("pnm: unsupported magic '" + magic + "'");

  std::istringstream header(bytes.substr(2));
  const int width = parse_int(next_token(header));
  const int height = parse_int(next_token(header));
  const int maxval = parse_int(next_token(header));
  if (width < 1 || height < 1) throw data_error("pnm: bad dimensions");
  if (maxval < 1 || maxval > 255) throw data_error("pnm: only 8-bit maxval supported");

  // exactly one whitespace byte separates the header from pixel data
  const std::size_t pixel_start = 2 + static_cast<std::size_t>(header.tellg()) + 1;
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < pixel_start + n) throw data_error("pnm: truncated pixel data");

  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pixel_start),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pixel_start + n));
  return img;
}

ImageU8 read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open image file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode(buf.str());
}

}  // namespace pareidolia::pnm
