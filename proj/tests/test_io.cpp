#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cskit/errors.hpp"
#include "cskit/io.hpp"
#include "cskit/rng.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace cskit;

namespace {

// Unique scratch path per test file run; cleaned up by the fixture.
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path("/tmp/cskit_io_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("format_g17 round trips doubles exactly") {
  Rng rng(81);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, i % 40 - 20);
    const std::string s = io::format_g17(v);
    CHECK(io::parse_double(s, "t") == v);
  }
  CHECK(io::format_g17(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_g17(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::format_g17(std::nan("")) == "nan");
  CHECK(io::parse_double("inf", "t") ==
        std::numeric_limits<double>::infinity());
  CHECK(io::parse_double("-inf", "t") ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(io::parse_double("1.5x", "t"), IoError);
  CHECK_THROWS_AS(io::parse_double("", "t"), IoError);
  CHECK(io::parse_u64("12345", "t") == 12345);
  CHECK_THROWS_AS(io::parse_u64("-3", "t"), IoError);
  CHECK_THROWS_AS(io::parse_u64("7.5", "t"), IoError);
}

TEST_CASE("csv round trip is exact") {
  TempFile f("roundtrip.csv");
  la::Mat rows(3, 2);
  Rng rng(82);
  testutil::fill_uniform(rows.a, rng);
  rows(0, 0) = 1.0 / 3.0;
  rows(2, 1) = -1e-17;

  io::write_csv(f.path, "signals", {{"n", "2"}, {"seed", "7"}},
                {"a", "b"}, rows);
  const io::Csv back = io::read_csv(f.path, "signals");
  CHECK(back.tag == "signals");
  CHECK(back.meta.at("n") == "2");
  CHECK(back.meta.at("seed") == "7");
  CHECK(back.header == std::vector<std::string>{"a", "b"});
  REQUIRE(back.rows.rows == 3);
  REQUIRE(back.rows.cols == 2);
  CHECK(back.rows.a == rows.a);

  // Rewriting what was read reproduces the file byte for byte.
  TempFile g("rewrite.csv");
  io::Meta meta;
  for (const auto& [k, v] : back.meta) meta.emplace_back(k, v);
  io::write_csv(g.path, back.tag, meta, back.header, back.rows);
  CHECK(io::read_text_file(g.path) == io::read_text_file(f.path));
}

TEST_CASE("csv reader flags malformed input with line numbers") {
  TempFile f("bad.csv");

  io::write_text_file(f.path, "no metadata\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path),
                       doctest::Contains(":1:"), IoError);

  io::write_text_file(f.path, "# signals n=4\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path),
                       doctest::Contains("missing header"), IoError);

  io::write_text_file(f.path, "# signals\na,b\n1.5,2.5\n3.5\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path), doctest::Contains(":4:"),
                       IoError);

  io::write_text_file(f.path, "# signals\na,b\n1.5,oops\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path),
                       doctest::Contains("bad number 'oops'"), IoError);

  io::write_text_file(f.path, "# signals broken-token\na\n1\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path), doctest::Contains("lacks '='"),
                       IoError);

  io::write_text_file(f.path, "# measurements n=4\na,b\n1,2\n");
  CHECK_THROWS_WITH_AS(io::read_csv(f.path, "signals"),
                       doctest::Contains("expected a 'signals' file"),
                       IoError);

  CHECK_THROWS_AS(io::read_csv("/nonexistent/nope.csv"), IoError);
}

TEST_CASE("pgm round trip preserves quantized pixels and metadata") {
  TempFile f("img.pgm");
  la::Mat img(5, 7);
  Rng rng(83);
  for (double& e : img.a) e = rng.uniform();
  img.a[0] = 0.0;
  img.a[1] = 1.0;
  img.a[2] = 1.7;   // clamps to 1
  img.a[3] = -0.3;  // clamps to 0

  io::write_pgm(f.path, img, {{"kr", "0.55"}, {"sigma", "1.25"}});
  std::map<std::string, std::string> meta;
  const la::Mat back = io::read_pgm(f.path, &meta);
  CHECK(back.rows == 5);
  CHECK(back.cols == 7);
  CHECK(meta.at("kr") == "0.55");
  CHECK(meta.at("sigma") == "1.25");
  for (std::size_t i = 0; i < img.a.size(); ++i) {
    const double clamped = std::min(1.0, std::max(0.0, img.a[i]));
    CHECK(std::fabs(back.a[i] - clamped) <= 0.5 / 255.0 + 1e-12);
  }

  // A second write of the read-back image is byte-identical: the pixel
  // grid is already on the 1/255 lattice.
  TempFile g("img2.pgm");
  io::write_pgm(g.path, back, {{"kr", "0.55"}, {"sigma", "1.25"}});
  const std::string b1 = io::read_text_file(f.path);
  const std::string b2 = io::read_text_file(g.path);
  CHECK(b1 == b2);
}

TEST_CASE("pgm reader rejects malformed files") {
  TempFile f("bad.pgm");
  io::write_text_file(f.path, "P2\n4 4\n255\n");
  CHECK_THROWS_WITH_AS(io::read_pgm(f.path), doctest::Contains("P5"), IoError);

  io::write_text_file(f.path, "P5\n4 4\n65535\n");
  CHECK_THROWS_WITH_AS(io::read_pgm(f.path), doctest::Contains("maxval"),
                       IoError);

  io::write_text_file(f.path, std::string("P5\n4 4\n255\n") + "abc");
  CHECK_THROWS_WITH_AS(io::read_pgm(f.path), doctest::Contains("truncated"),
                       IoError);

  io::write_text_file(f.path, "P5\n4\n");
  CHECK_THROWS_AS(io::read_pgm(f.path), IoError);

  CHECK_THROWS_AS(io::read_pgm("/nonexistent/nope.pgm"), IoError);
}

TEST_CASE("fnv1a64 matches the published reference values") {
  // Standard FNV-1a test vectors.
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(io::fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(io::hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
  CHECK(io::hex64(0x1ull) == "0000000000000001");
}

TEST_SUITE_END();
