#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "csmc/error.hpp"
#include "csmc/io/keyvalue.hpp"
#include "csmc/io/measurement_file.hpp"
#include "csmc/io/metrics.hpp"
#include "csmc/io/model_file.hpp"
#include "csmc/io/pgm.hpp"
#include "csmc/io/y4m.hpp"
#include "csmc/sensing/sampling.hpp"
#include "oracles.hpp"

using namespace csmc;
using namespace csmc::io;
using sensing::FramePlane;
using sensing::Ratio;

namespace {

std::string bytes(std::initializer_list<int> values) {
  std::string s;
  for (int v : values) s.push_back(static_cast<char>(v));
  return s;
}

std::uint64_t parse_error_offset(const std::string& stream) {
  std::istringstream in(stream);
  try {
    parse_y4m(in);
  } catch (const ParseError& e) {
    return e.offset();
  }
  FAIL("expected a parse error");
  return 0;
}

unfold::ModelParams sample_model(bool itp) {
  unfold::ModelConfig c;
  c.block = 4;
  c.stages = 2;
  c.cr_list = itp ? std::vector<Ratio>{Ratio::from_double(0.25), Ratio::from_double(0.5)}
                  : std::vector<Ratio>{Ratio::from_double(0.5)};
  c.itp = itp;
  c.conv.channels = {1, 3, 1};
  c.hypothesis_stride = 2;
  c.alpha = 0.4;
  c.mhme_every_stage = false;
  c.operator_seed = 1234567890123ULL;
  c.norm = {101.5, 47.25};
  auto m = unfold::init_model(c, 9);
  Rng rng(3);
  for (auto& p : unfold::named_parameters(m)) {
    for (double& v : p.tensor->data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return m;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("Y4M: minimal 2x2 mono stream") {
    const std::string s = "YUV4MPEG2 W2 H2 F25:1 Ip A1:1 Cmono\nFRAME\n" + bytes({0, 10, 200, 255});
    std::istringstream in(s);
    const auto frames = parse_y4m(in);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].height == 2);
    CHECK(frames[0].width == 2);
    CHECK(frames[0].values == std::vector<double>{0, 10, 200, 255});
  }

  TEST_CASE("Y4M: 4:2:0 chroma is skipped and frame parameters are allowed") {
    // 4x2 luma, chroma planes 2x1 each
    std::string s = "YUV4MPEG2 W4 H2 C420jpeg\n";
    s += "FRAME\n" + bytes({1, 2, 3, 4, 5, 6, 7, 8}) + bytes({90, 91, 92, 93});
    s += "FRAME Ixyz\n" + bytes({9, 9, 9, 9, 9, 9, 9, 9}) + bytes({0, 0, 0, 0});
    std::istringstream in(s);
    const auto frames = parse_y4m(in);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].at(1, 3) == 8);
    CHECK(frames[1].at(0, 0) == 9);
    CHECK(frames[1].index == 1);
  }

  TEST_CASE("Y4M: default colorspace is 4:2:0 and odd sizes round chroma up") {
    std::string s = "YUV4MPEG2 W3 H1\nFRAME\n" + bytes({7, 8, 9}) + bytes({0, 0, 0, 0});
    std::istringstream in(s);
    CHECK(parse_y4m(in).size() == 1);
  }

  TEST_CASE("Y4M: 4:4:4 stream") {
    std::string s = "YUV4MPEG2 W1 H2 C444\nFRAME\n" + bytes({3, 4}) + bytes({0, 0, 0, 0});
    std::istringstream in(s);
    const auto frames = parse_y4m(in);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].values == std::vector<double>{3, 4});
  }

  TEST_CASE("Y4M: errors carry byte offsets") {
    CHECK(parse_error_offset("YUV4MPEG W2 H2\n") == 0);
    const std::string header = "YUV4MPEG2 W2 H2 Cmono\n";
    CHECK(parse_error_offset(header + "FRAMX\n" + bytes({1, 2, 3, 4})) == header.size());
    const std::string one = header + "FRAME\n" + bytes({1, 2, 3, 4});
    CHECK(parse_error_offset(one + "garbage\n") == one.size());
    CHECK(parse_error_offset(header + "FRAME\n" + bytes({1, 2, 3})) == header.size() + 6 + 3);
    CHECK(parse_error_offset("YUV4MPEG2 W2 H2 C422\n") == 16);
    CHECK(parse_error_offset("YUV4MPEG2 W2 H2 C420p10\n") == 16);
    CHECK(parse_error_offset("YUV4MPEG2 W2\n") == 13);
  }

  TEST_CASE("Y4M: writer output parses back") {
    Rng rng(1);
    std::vector<FramePlane> frames{testing::random_frame(3, 5, rng), testing::random_frame(3, 5, rng)};
    for (auto& f : frames) {
      for (double& v : f.values) v = std::round(v);
    }
    std::stringstream s;
    write_y4m(s, frames);
    const auto back = parse_y4m(s);
    REQUIRE(back.size() == 2);
    CHECK(back[0].values == frames[0].values);
    CHECK(back[1].values == frames[1].values);
  }

  TEST_CASE("PGM round-trip with rounding and clamping") {
    FramePlane f(2, 3);
    f.values = {-5.0, 0.4, 0.6, 127.5, 254.6, 300.0};
    std::stringstream s;
    write_pgm(s, f);
    CHECK(s.str().substr(0, 11) == "P5\n3 2\n255\n");
    const auto back = read_pgm(s);
    CHECK(back.values == std::vector<double>{0, 0, 1, 128, 255, 255});
    std::istringstream commented("P5\n# comment\n1 1\n255\n" + bytes({42}));
    CHECK(read_pgm(commented).values == std::vector<double>{42});
    std::istringstream truncated("P5\n2 2\n255\n" + bytes({1}));
    CHECK_THROWS_AS(read_pgm(truncated), ParseError);
    std::istringstream ascii("P2\n1 1\n255\n1\n");
    CHECK_THROWS_AS(read_pgm(ascii), ParseError);
  }

  TEST_CASE("PSNR closed forms") {
    FramePlane a(4, 4, 100.0), b(4, 4, 101.0);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(format_db(psnr(a, a)) == "inf");
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)));
    CHECK(psnr(FramePlane(2, 2, 0.0), FramePlane(2, 2, 255.0)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(psnr(a, FramePlane(4, 5)), GeometryError);
    CHECK(format_db(48.1308, 2) == "48.13");
  }

  TEST_CASE("SSIM examples") {
    Rng rng(2);
    const auto a = testing::random_frame(24, 24, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    auto inv = a;
    for (double& v : inv.values) v = 255.0 - v;
    CHECK(ssim(a, inv) < 1.0);
    CHECK(ssim(a, inv) < 0.0);
    CHECK(ssim(FramePlane(16, 16, 80.0), FramePlane(16, 16, 80.0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ssim(a, FramePlane(24, 23)), GeometryError);
    const double small = ssim(testing::random_frame(5, 7, rng), testing::random_frame(5, 7, rng));
    CHECK(small >= -1.0);
    CHECK(small <= 1.0);
  }

  TEST_CASE("property: metrics agree with an independent reference") {
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
      const auto a = testing::random_frame(32, 40, rng);
      auto b = a;
      for (double& v : b.values) v = std::clamp(v + rng.uniform(-30.0, 30.0), 0.0, 255.0);
      CHECK(std::abs(psnr(a, b) - testing::naive_psnr(a, b)) < 1e-6);
      CHECK(std::abs(ssim(a, b) - testing::naive_ssim(a, b)) < 1e-6);
    }
  }

  TEST_CASE("model file round-trip is bitwise") {
    for (const bool itp : {false, true}) {
      const auto m = sample_model(itp);
      std::stringstream s;
      save_model(s, m);
      const std::string first = s.str();
      CHECK(first.substr(0, 4) == "CSKN");
      const auto back = load_model(s);
      CHECK(back.config.cr_list == m.config.cr_list);
      CHECK(back.config.conv == m.config.conv);
      CHECK(back.config.itp == itp);
      CHECK(back.config.alpha == m.config.alpha);
      CHECK(back.config.mhme_every_stage == m.config.mhme_every_stage);
      CHECK(back.config.operator_seed == m.config.operator_seed);
      CHECK(back.config.norm.mean == m.config.norm.mean);
      CHECK(back.config.norm.stddev == m.config.norm.stddev);
      const auto pa = unfold::named_parameters(m);
      const auto pb = unfold::named_parameters(back);
      REQUIRE(pa.size() == pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].name == pb[i].name);
        CHECK(pa[i].tensor->shape() == pb[i].tensor->shape());
        CHECK(std::equal(pa[i].tensor->data().begin(), pa[i].tensor->data().end(), pb[i].tensor->data().begin()));
      }
      std::stringstream again;
      save_model(again, back);
      CHECK(again.str() == first);
    }
  }

  TEST_CASE("model file rejects corrupt input") {
    const auto m = sample_model(false);
    std::stringstream s;
    save_model(s, m);
    const std::string good = s.str();
    std::istringstream truncated(good.substr(0, good.size() - 3));
    CHECK_THROWS_AS(load_model(truncated), ParseError);
    std::string renamed = good;
    renamed.replace(renamed.find("stage0.pre.fc.weight"), 6, "stageX");
    std::istringstream bad_name(renamed);
    CHECK_THROWS_AS(load_model(bad_name), ParseError);
    std::string version = good;
    version[4] = 9;
    std::istringstream bad_version(version);
    CHECK_THROWS_AS(load_model(bad_version), ParseError);
  }

  TEST_CASE("measurement stream round-trip is bitwise") {
    Rng rng(4);
    const auto op = sensing::MeasurementOperator::make(16, 0.1, 5);
    MeasurementStream stream;
    stream.block = 16;
    stream.operator_seed = 5;
    for (int t = 0; t < 3; ++t) {
      auto g = sensing::sample_frame(op.rate_view(Ratio::from_double(0.1)), testing::random_frame(32, 48, rng),
                                     Ratio::from_double(0.1));
      for (double& v : g.data) v = static_cast<float>(v);
      stream.frames.push_back(std::move(g));
    }
    std::stringstream s;
    write_measurements(s, stream);
    const std::string first = s.str();
    CHECK(first.substr(0, 4) == "CSKY");
    CHECK(first.size() == 4 + 7 * 4 + 8 + 3 * 26 * 6 * 4);
    const auto back = read_measurements(s);
    CHECK(back == stream);
    std::stringstream again;
    write_measurements(again, back);
    CHECK(again.str() == first);
    std::istringstream cut(first.substr(0, first.size() - 1));
    CHECK_THROWS_AS(read_measurements(cut), ParseError);
  }

  TEST_CASE("key=value config") {
    std::istringstream in(
        "# training\nlr = 0.001\ncr = 0.02, 0.1 ,0.2\nname = \"a # b\"  # trailing\nitp = true\n\nblocks=1,64,1\n");
    const auto kv = KeyValueConfig::parse(in);
    CHECK(kv.get_double("lr", 0) == doctest::Approx(0.001));
    CHECK(kv.get_doubles("cr", {}) == std::vector<double>{0.02, 0.1, 0.2});
    CHECK(kv.get_string("name", "") == "a # b");
    CHECK(kv.get_bool("itp", false));
    CHECK(kv.get_uint("missing", 7) == 7);
    CHECK(kv.unused_keys() == std::vector<std::string>{"blocks"});
    CHECK(kv.get_sizes("blocks", {}) == std::vector<std::size_t>{1, 64, 1});
    CHECK_THROWS_AS(kv.get_uint("lr", 0), ConfigError);
    std::istringstream dup("a = 1\na = 2\n");
    CHECK_THROWS_AS(KeyValueConfig::parse(dup), ParseError);
    std::istringstream junk("a = 1\njust words\n");
    try {
      KeyValueConfig::parse(junk);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 6);
    }
  }
}
