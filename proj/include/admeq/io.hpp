#ifndef ADMEQ_IO_HPP_
#define ADMEQ_IO_HPP_

#include "admeq/core.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace admeq {

struct GridImage {
  Index rows = 0;
  Index cols = 0;
  Vector pixels;  // row-major, intensities in [0, 1]
};

namespace io_detail {

// Skips whitespace and '#' comment lines in a PGM header.
inline std::string next_token(std::istream& in) {
  std::string tok;
  while (in) {
    const int c = in.peek();
    if (c == EOF) break;
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    in >> tok;
    return tok;
  }
  throw ParseError("PGM: unexpected end of header");
}

inline long parse_long(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw ParseError("");
    return v;
  } catch (...) {
    throw ParseError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace io_detail

// Plain (P2) and raw (P5) PGM; intensities are divided by maxval.
inline GridImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  const std::string magic = io_detail::next_token(in);
  if (magic != "P2" && magic != "P5") throw ParseError("PGM: unsupported magic '" + magic + "'");
  const long w = io_detail::parse_long(io_detail::next_token(in), "width");
  const long h = io_detail::parse_long(io_detail::next_token(in), "height");
  const long maxval = io_detail::parse_long(io_detail::next_token(in), "maxval");
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw ParseError("PGM: invalid dimensions or maxval");

  GridImage img;
  img.rows = h;
  img.cols = w;
  img.pixels.resize(h * w);
  if (magic == "P2") {
    for (Index i = 0; i < h * w; ++i) {
      const long v = io_detail::parse_long(io_detail::next_token(in), "pixel");
      if (v < 0 || v > maxval) throw ParseError("PGM: pixel out of range");
      img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(static_cast<size_t>(h) * w * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw ParseError("PGM: truncated raster");
    for (Index i = 0; i < h * w; ++i) {
      const long v = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
      img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

// Comma- or whitespace-separated numeric grid, one image row per line.
// Values above 1 are rescaled by the maximum so intensities land in [0, 1].
inline GridImage read_csv_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        size_t pos = 0;
        row.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) throw ParseError("");
      } catch (...) {
        throw ParseError("CSV grid: bad value '" + tok + "' at line " +
                         std::to_string(lineno));
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("CSV grid: ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2 || rows.front().size() < 2)
    throw ParseError("CSV grid: need at least a 2 x 2 grid");
  GridImage img;
  img.rows = static_cast<Index>(rows.size());
  img.cols = static_cast<Index>(rows.front().size());
  img.pixels.resize(img.rows * img.cols);
  double maxval = 0.0;
  for (Index i = 0; i < img.rows; ++i)
    for (Index j = 0; j < img.cols; ++j) {
      const double v = rows[i][j];
      if (!std::isfinite(v)) throw ParseError("CSV grid: non-finite value");
      img.pixels[i * img.cols + j] = v;
      maxval = std::max(maxval, std::abs(v));
    }
  if (maxval > 1.0) img.pixels /= maxval;
  return img;
}

inline GridImage read_image(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) return read_pgm(path);
  return read_csv_grid(path);
}

// 17 significant digits: doubles round-trip exactly through this format.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace admeq

#endif  // ADMEQ_IO_HPP_
