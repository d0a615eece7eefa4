#include "cskit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cskit/errors.hpp"

namespace cskit::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& what) {
  throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw IoError(context + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& context) {
  std::uint64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw IoError(context + ": bad integer '" + s + "'");
  return v;
}

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  Csv out;
  std::string line;
  std::size_t lineno = 0;

  // Metadata line: "# tag key=value ...".
  if (!std::getline(in, line)) fail_at(path, 1, "empty file");
  ++lineno;
  if (line.size() < 2 || line[0] != '#')
    fail_at(path, lineno, "expected '# <tag> ...' metadata line");
  {
    std::istringstream ss(line.substr(1));
    std::string token;
    if (!(ss >> out.tag)) fail_at(path, lineno, "missing tag");
    while (ss >> token) {
      const std::size_t eq = token.find('=');
      if (eq == std::string::npos)
        fail_at(path, lineno, "metadata token '" + token + "' lacks '='");
      out.meta[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }

  if (!std::getline(in, line)) fail_at(path, lineno + 1, "missing header row");
  ++lineno;
  out.header = split(line, ',');
  const std::size_t width = out.header.size();
  if (width == 0) fail_at(path, lineno, "empty header row");

  std::vector<double> data;
  std::size_t nrows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != width)
      fail_at(path, lineno,
              "expected " + std::to_string(width) + " cells, got " +
                  std::to_string(cells.size()));
    for (std::size_t j = 0; j < width; ++j) {
      try {
        data.push_back(parse_double(cells[j], ""));
      } catch (const IoError&) {
        fail_at(path, lineno,
                "column " + std::to_string(j + 1) + ": bad number '" +
                    cells[j] + "'");
      }
    }
    ++nrows;
  }
  out.rows = la::Mat(nrows, width);
  out.rows.a = std::move(data);
  return out;
}

Csv read_csv(const std::string& path, const std::string& expect_tag) {
  Csv out = read_csv(path);
  if (out.tag != expect_tag)
    throw IoError(path + ": expected a '" + expect_tag + "' file, found '" +
                  out.tag + "'");
  return out;
}

void write_csv(const std::string& path, const std::string& tag,
               const Meta& meta, const std::vector<std::string>& header,
               const la::Mat& rows) {
  if (header.size() != rows.cols && !rows.empty())
    throw DimensionError("write_csv: header width mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "# " << tag;
  for (const auto& [k, v] : meta) out << ' ' << k << '=' << v;
  out << '\n';
  for (std::size_t j = 0; j < header.size(); ++j)
    out << header[j] << (j + 1 < header.size() ? "," : "");
  out << '\n';
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t j = 0; j < rows.cols; ++j)
      out << format_g17(rows(i, j)) << (j + 1 < rows.cols ? "," : "");
    out << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

namespace {

// Reads one whitespace-delimited PGM header token, skipping comments and
// capturing tagged metadata comments.
std::string pgm_token(std::istream& in, const std::string& path,
                      std::map<std::string, std::string>* meta) {
  for (;;) {
    int c = in.get();
    if (c == EOF) throw IoError(path + ": truncated header");
    if (std::isspace(c)) continue;
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      if (meta) {
        std::istringstream ss(comment);
        std::string token;
        while (ss >> token) {
          const std::size_t eq = token.find('=');
          if (eq != std::string::npos)
            (*meta)[token.substr(0, eq)] = token.substr(eq + 1);
        }
      }
      continue;
    }
    std::string token(1, static_cast<char>(c));
    while (in.peek() != EOF && !std::isspace(in.peek()))
      token.push_back(static_cast<char>(in.get()));
    return token;
  }
}

}  // namespace

la::Mat read_pgm(const std::string& path,
                 std::map<std::string, std::string>* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  if (pgm_token(in, path, meta) != "P5")
    throw IoError(path + ": not a binary PGM (P5) file");
  const std::uint64_t w = parse_u64(pgm_token(in, path, meta), path + ": width");
  const std::uint64_t h =
      parse_u64(pgm_token(in, path, meta), path + ": height");
  const std::uint64_t maxval =
      parse_u64(pgm_token(in, path, meta), path + ": maxval");
  if (w == 0 || h == 0) throw IoError(path + ": zero image dimension");
  if (maxval != 255)
    throw IoError(path + ": only maxval 255 supported, got " +
                  std::to_string(maxval));
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep))
    throw IoError(path + ": missing separator before pixel data");
  std::vector<unsigned char> bytes(w * h);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw IoError(path + ": pixel data truncated at byte " +
                  std::to_string(in.gcount()));
  la::Mat img(h, w);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    img.a[i] = static_cast<double>(bytes[i]) / 255.0;
  return img;
}

void write_pgm(const std::string& path, const la::Mat& img, const Meta& meta) {
  if (img.empty()) throw DimensionError("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "P5\n";
  if (!meta.empty()) {
    out << "#";
    for (const auto& [k, v] : meta) out << ' ' << k << '=' << v;
    out << '\n';
  }
  out << img.cols << ' ' << img.rows << "\n255\n";
  std::vector<unsigned char> bytes(img.a.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::clamp(img.a[i], 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace cskit::io
