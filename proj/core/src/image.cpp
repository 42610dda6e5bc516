#include "valet/image.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <sstream>

namespace valet {

std::uint8_t to_level(double intensity) {
  const double v = std::clamp(intensity, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

GrayImage crop(const GrayImage& img, const PixelRect& rect) {
  if (!rect.inside(img.width(), img.height())) throw DimensionError("crop rectangle outside image");
  GrayImage out(rect.width, rect.height);
  for (int r = 0; r < rect.height; ++r) {
    for (int c = 0; c < rect.width; ++c) out.at(c, r) = img.at(rect.col0 + c, rect.row0 + r);
  }
  return out;
}

GrayImage transpose(const GrayImage& img) {
  GrayImage out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.at(r, c) = img.at(c, r);
  }
  return out;
}

GrayImage mirror_horizontal(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.at(img.width() - 1 - c, r) = img.at(c, r);
  }
  return out;
}

std::string encode_pgm(const GrayImage& img) {
  std::ostringstream os;
  os << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto px = img.pixels();
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  return os.str();
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  char ch = 0;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(is, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

GrayImage decode_pgm(const std::string& bytes) {
  std::istringstream is(bytes);
  if (next_token(is) != "P5") throw ConfigError("PGM: expected P5 magic");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(is));
    h = std::stoi(next_token(is));
    maxval = std::stoi(next_token(is));
  } catch (const std::exception&) {
    throw ConfigError("PGM: malformed header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw ConfigError("PGM: unsupported size or maxval");
  GrayImage img(w, h);
  auto px = img.pixels();
  is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (is.gcount() != static_cast<std::streamsize>(px.size())) throw ConfigError("PGM: truncated data");
  return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << encode_pgm(img);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_pgm(ss.str());
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (const Rgb& p : img.pixels()) {
    const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    os.write(rgb, 3);
  }
}

RgbImage to_rgb(const GrayImage& img) {
  RgbImage out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const auto v = img.at(c, r);
      out.at(c, r) = {v, v, v};
    }
  }
  return out;
}

}  // namespace valet
