#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fnc/io.hpp"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("io_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("statistics csv with and without header parse to the same data") {
  TempFile with_header("a.csv", "id,p\nrs1,0.01\nrs2,0.5\nrs3,0.9\n");
  TempFile without_header("b.csv", "rs1,0.01\nrs2,0.5\nrs3,0.9\n");
  const auto a = fnc::read_statistics_csv(with_header.path, {}, fnc::Sidedness::one_sided);
  const auto b =
      fnc::read_statistics_csv(without_header.path, {}, fnc::Sidedness::one_sided);
  CHECK(a.values == b.values);
  CHECK(a.ids == b.ids);
  CHECK(a.scale == fnc::Scale::p);
  CHECK(b.scale == fnc::Scale::p);  // inferred: all values in (0,1]
}

TEST_CASE("z columns are recognized by header and by value range") {
  TempFile header("z1.csv", "id,z\nv1,1.5\nv2,-0.3\n");
  const auto by_header = fnc::read_statistics_csv(header.path, {}, fnc::Sidedness::one_sided);
  CHECK(by_header.scale == fnc::Scale::z);

  TempFile bare("z2.csv", "v1,1.5\nv2,-0.3\n");
  const auto inferred = fnc::read_statistics_csv(bare.path, {}, fnc::Sidedness::one_sided);
  CHECK(inferred.scale == fnc::Scale::z);  // negative value rules out p

  const auto forced =
      fnc::read_statistics_csv(header.path, fnc::Scale::z, fnc::Sidedness::two_sided);
  CHECK(forced.sidedness == fnc::Sidedness::two_sided);
}

TEST_CASE("value-only csv gets no ids") {
  TempFile bare("v.csv", "0.2\n0.4\n0.6\n");
  const auto stats = fnc::read_statistics_csv(bare.path, {}, fnc::Sidedness::one_sided);
  CHECK(stats.values.size() == 3);
  CHECK(stats.ids.empty());
}

TEST_CASE("malformed csv reports the line number") {
  TempFile bad("bad.csv", "id,p\nrs1,0.01\nrs2,oops\n");
  try {
    fnc::read_statistics_csv(bad.path, {}, fnc::Sidedness::one_sided);
    FAIL("expected CsvError");
  } catch (const fnc::CsvError& error) {
    CHECK(error.line() == 3);
    CHECK(std::string(error.what()).find("line 3") != std::string::npos);
  }
  TempFile ragged("ragged.csv", "id,p\nrs1,0.01\nrs2,0.3,0.4\n");
  CHECK_THROWS_AS(fnc::read_statistics_csv(ragged.path, {}, fnc::Sidedness::one_sided),
                  fnc::CsvError);
}

TEST_CASE("ensemble header and id column are auto-detected") {
  const std::string body = "0.5,0.25,0.75\n0.1,0.9,0.3\n";
  TempFile plain("e1.csv", body);
  TempFile with_header("e2.csv", "set_id,p_1,p_2,p_3\ns0,0.5,0.25,0.75\ns1,0.1,0.9,0.3\n");
  TempFile numeric_ids("e3.csv", "set_id,p_1,p_2,p_3\n0,0.5,0.25,0.75\n1,0.1,0.9,0.3\n");
  const auto a = fnc::read_ensemble_csv(plain.path);
  const auto b = fnc::read_ensemble_csv(with_header.path);
  const auto c = fnc::read_ensemble_csv(numeric_ids.path);
  CHECK(a.pvalue_sets == b.pvalue_sets);
  CHECK(a.pvalue_sets == c.pvalue_sets);
  CHECK(a.m() == 3);
  CHECK(a.n_sets() == 2);
}

TEST_CASE("atomic write replaces content completely") {
  const std::string path = "io_test_atomic.txt";
  fnc::atomic_write_file(path, "first");
  fnc::atomic_write_file(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "second");
  std::remove(path.c_str());
}

TEST_CASE("digest is content addressed") {
  TempFile a("d1.csv", "same bytes");
  TempFile b("d2.csv", "same bytes");
  TempFile c("d3.csv", "other bytes");
  CHECK(fnc::file_digest_hex(a.path) == fnc::file_digest_hex(b.path));
  CHECK(fnc::file_digest_hex(a.path) != fnc::file_digest_hex(c.path));
  CHECK(fnc::file_digest_hex(a.path).rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("model spec grammar") {
  CHECK(fnc::parse_model_spec("ar:0.2", 100).describe() == "ar:0.2");
  CHECK(fnc::parse_model_spec("identity", 100).describe() == "ar:0");
  CHECK(fnc::parse_model_spec("block:10:0.5", 100).describe() == "block:10:0.5");
  CHECK(fnc::parse_model_spec("randblocks:4:5:30:0.5:7", 100).describe() ==
        "randblocks:4:5:30:0.5:7");
  CHECK(fnc::parse_model_spec("factor:0.5:9", 100).describe() == "factor:0.5:9");
  CHECK_THROWS_AS(fnc::parse_model_spec("ar", 100), std::invalid_argument);
  CHECK_THROWS_AS(fnc::parse_model_spec("mystery:1", 100), std::invalid_argument);
}

TEST_CASE("bounding sequences json round trip") {
  fnc::BoundingSequences bounds;
  bounds.m = 500;
  bounds.n_sets = 250;
  bounds.quantile_level = 0.6;
  bounds.c_half = 0.1234;
  bounds.c_one = 2.5;
  const auto loaded = fnc::bounding_sequences_from_json(fnc::to_json(bounds));
  CHECK(loaded.m == 500);
  CHECK(loaded.n_sets == 250);
  CHECK(loaded.c_half == bounds.c_half);
  CHECK(loaded.c_one == bounds.c_one);
}

TEST_CASE("manifest json carries the reproduction fields") {
  fnc::RunManifest manifest;
  manifest.command = "screen";
  manifest.seed = 99;
  manifest.version = "0.1.0";
  manifest.config = {{"beta", 0.1}};
  manifest.input_digests["in.csv"] = "fnv1a64:abc";
  manifest.wall_seconds = 0.25;
  const auto j = fnc::to_json(manifest);
  CHECK(j.at("command") == "screen");
  CHECK(j.at("seed") == 99);
  CHECK(j.at("inputs").at("in.csv") == "fnv1a64:abc");
  CHECK(j.at("config").at("beta") == 0.1);
}
