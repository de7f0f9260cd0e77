#pragma once

// CSV output and the binary matrix dump.
//
// Dump layout (little-endian host order):
//   uint32 magic = 0x57584d46 ("FMXW" in file byte order)
//   uint32 n     partition size in x
//   uint32 rows
//   uint32 cols
//   rows * cols float64, row-major

#include "fastmaxwell/core.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace fastmaxwell {

inline constexpr std::uint32_t dump_magic = 0x57584d46u;

/// Formats a double with 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using CsvCell = std::variant<std::string, double, long long>;

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(os), cols_(header.size()) {
    write_line(header);
  }

  void row(const std::vector<CsvCell>& cells) {
    if (cells.size() != cols_) throw SizeError("CsvWriter: row has the wrong number of cells");
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (const auto& c : cells) {
      if (const auto* d = std::get_if<double>(&c)) {
        s.push_back(format_double(*d));
      } else if (const auto* i = std::get_if<long long>(&c)) {
        s.push_back(std::to_string(*i));
      } else {
        s.push_back(std::get<std::string>(c));
      }
    }
    write_line(s);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) os_ << ',';
      os_ << cells[k];
    }
    os_ << '\n';
  }

  std::ostream& os_;
  std::size_t cols_;
};

struct MatrixDump {
  std::uint32_t n = 0;
  Matrix data;
};

inline void write_dump(const std::string& path, std::uint32_t n, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::uint32_t header[4] = {dump_magic, n, static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

inline MatrixDump read_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] != dump_magic) throw Error("'" + path + "' is not a matrix dump");
  MatrixDump d;
  d.n = header[1];
  d.data.resize(header[2], header[3]);
  in.read(reinterpret_cast<char*>(d.data.data()),
          static_cast<std::streamsize>(sizeof(double) * d.data.size()));
  if (!in) throw Error("'" + path + "' is truncated");
  return d;
}

}  // namespace fastmaxwell
