#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cskit/linalg.hpp"

namespace cskit::io {

using Meta = std::vector<std::pair<std::string, std::string>>;

// CSV carrying one sample per row plus a tagged metadata comment line:
//   # <tag> key=value key=value ...
//   h0,h1,...
//   1.5,2.5,...
// Numbers are written with 17 significant digits so a round trip is exact.
struct Csv {
  std::string tag;
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  la::Mat rows;
};

Csv read_csv(const std::string& path);
// Reads and checks the tag, so callers get a clear error on the wrong kind
// of file.
Csv read_csv(const std::string& path, const std::string& expect_tag);
void write_csv(const std::string& path, const std::string& tag,
               const Meta& meta, const std::vector<std::string>& header,
               const la::Mat& rows);

// 8-bit binary PGM. Pixels map [0,1] <-> 0..255; metadata rides in a comment
// line after the magic number.
la::Mat read_pgm(const std::string& path,
                 std::map<std::string, std::string>* meta = nullptr);
void write_pgm(const std::string& path, const la::Mat& img,
               const Meta& meta = {});

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a, used for the setup fingerprints embedded in reports.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// %.17g, the round-trip-exact double format used in every text output.
std::string format_g17(double v);
double parse_double(const std::string& s, const std::string& context);
std::uint64_t parse_u64(const std::string& s, const std::string& context);

}  // namespace cskit::io
