#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "kslab/io.hpp"

using namespace kslab;

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("io_test_" + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

GridField sample_field() {
  GridSpec g;
  g.d = 2;
  g.n = 12;
  g.L = 6.0;
  GridField f(g);
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (double& v : f.data) v = unif(gen);
  return f;
}

}  // namespace

TEST_CASE("field binary round trip is exact") {
  const GridField f = sample_field();
  TempPath tmp("field.bin");
  write_field_binary(tmp.path, f, 0.75, "0123456789abcdef");
  double t = 0.0;
  std::string hash;
  const GridField back = read_field_binary(tmp.path, &t, &hash);
  CHECK(back.spec == f.spec);
  CHECK(t == 0.75);
  CHECK(hash == "0123456789abcdef");
  REQUIRE(back.data.size() == f.data.size());
  for (size_t i = 0; i < f.data.size(); ++i) CHECK(back.data[i] == f.data[i]);
}

TEST_CASE("points binary round trip is exact") {
  std::vector<double> pos;
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const long n = 17;
  const int d = 3;
  for (long i = 0; i < n * d; ++i) pos.push_back(unif(gen));
  TempPath tmp("points.bin");
  write_points_binary(tmp.path, pos, n, d, 1.5, "fedcba9876543210");
  long n_out = 0;
  int d_out = 0;
  double t = 0.0;
  std::string hash;
  const std::vector<double> back = read_points_binary(tmp.path, &n_out, &d_out, &t, &hash);
  CHECK(n_out == n);
  CHECK(d_out == d);
  CHECK(t == 1.5);
  CHECK(hash == "fedcba9876543210");
  REQUIRE(back.size() == pos.size());
  for (size_t i = 0; i < pos.size(); ++i) CHECK(back[i] == pos[i]);
}

TEST_CASE("wrong magic is rejected") {
  std::vector<double> pos = {0.0, 1.0};
  TempPath tmp("magic.bin");
  write_points_binary(tmp.path, pos, 1, 2, 0.0, "0000000000000000");
  CHECK_THROWS_AS(read_field_binary(tmp.path), IoError);
  CHECK_THROWS_AS(read_field_binary("io_test_does_not_exist.bin"), IoError);
}

TEST_CASE("csv carries the hash comment and shortest-form doubles") {
  TempPath tmp("table.csv");
  write_csv(tmp.path, "00000000deadbeef", {"t", "value"},
            {{0.1, 1.0}, {0.2, 0.30000000000000004}});
  const std::string text = read_text(tmp.path);
  CHECK(text.find("# format=1 hash=00000000deadbeef") != std::string::npos);
  CHECK(text.find("t,value") != std::string::npos);
  CHECK(text.find("0.30000000000000004") != std::string::npos);
  // 0.1 must round trip through its shortest form
  CHECK(text.find("0.1,1") != std::string::npos);
}

TEST_CASE("norm series csv layout") {
  NormSeries s;
  s.times = {0.0, 0.5, 1.0};
  s.values = {2.0, 1.0, 0.5};
  s.exponent = 0.5;
  s.weighted = {0.0, 0.7071, 0.5};
  s.running_sup = {0.0, 0.7071, 0.7071};
  TempPath tmp("norms.csv");
  write_norm_series_csv(tmp.path, s, "1111111111111111");
  const std::string text = read_text(tmp.path);
  CHECK(text.find("t,") != std::string::npos);
  CHECK(text.find("0.7071") != std::string::npos);
}

TEST_CASE("field exports to csv and json") {
  GridSpec g;
  g.d = 1;
  g.n = 8;
  g.L = 4.0;
  GridField f(g);
  for (int j = 0; j < g.n; ++j) f.data[j] = 0.25 * j;
  TempPath tc("field.csv");
  write_field_csv(tc.path, f, 0.5, "2222222222222222");
  const std::string csv = read_text(tc.path);
  CHECK(csv.find("d=1") != std::string::npos);
  CHECK(csv.find("1.75") != std::string::npos);

  TempPath tj("field.json");
  write_field_json(tj.path, f, 0.5, "2222222222222222");
  const std::string json = read_text(tj.path);
  CHECK(json.find("\"2222222222222222\"") != std::string::npos);
  CHECK(json.find("\"data\"") != std::string::npos);
}

TEST_CASE("format_double shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.30000000000000004) == "0.30000000000000004");
  for (double v : {-2.5e-7, 1.0 / 3.0, 6.02e23, -0.0, 123456.789}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}
