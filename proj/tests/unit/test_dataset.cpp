#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "gmgan/dataset.hpp"

using namespace gmgan;

namespace {

std::filesystem::path tmp(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "gmgan_dataset_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_bytes(const std::filesystem::path& p, const std::vector<uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x));
}

// 2 images of 2x2 pixels; byte values chosen to hit the range endpoints.
std::filesystem::path fixture_images() {
  std::vector<uint8_t> v;
  push_be32(v, 0x00000803);
  push_be32(v, 2);
  push_be32(v, 2);
  push_be32(v, 2);
  const uint8_t pix[8] = {0, 255, 128, 64, 1, 2, 3, 4};
  v.insert(v.end(), pix, pix + 8);
  const auto p = tmp("images.idx");
  write_bytes(p, v);
  return p;
}

std::filesystem::path fixture_labels(uint32_t count = 2) {
  std::vector<uint8_t> v;
  push_be32(v, 0x00000801);
  push_be32(v, count);
  for (uint32_t i = 0; i < count; ++i) v.push_back(static_cast<uint8_t>(3 + 6 * i));
  const auto p = tmp("labels.idx");
  write_bytes(p, v);
  return p;
}

}  // namespace

TEST_CASE("gen_toy: defaults, labels, and component coverage") {
  Rng rng(1);
  Dataset ds = gen_toy(5000, 0.1, rng);
  CHECK(ds.size() == 5000);
  CHECK(ds.dim() == 2);
  CHECK(ds.modality() == Modality::Points);
  CHECK(ds.labeled());
  CHECK(ds.n_classes() == 9);
}

TEST_CASE("gen_toy: per-component counts within multinomial bounds") {
  Rng rng(2);
  const int64_t n = 90000;
  Dataset ds = gen_toy(n, 0.1, rng);
  std::vector<int64_t> counts(9, 0);
  for (int64_t i = 0; i < n; ++i) ++counts[static_cast<size_t>(ds.label(i))];
  const double expect = static_cast<double>(n) / 9.0;
  const double sigma = std::sqrt(n * (1.0 / 9.0) * (8.0 / 9.0));
  for (int64_t c : counts) CHECK(std::abs(static_cast<double>(c) - expect) < 5 * sigma);
}

TEST_CASE("gen_toy: vanishing variance collapses onto the grid means") {
  Rng rng(3);
  Dataset ds = gen_toy(500, 1e-16, rng);
  for (int64_t i = 0; i < ds.size(); ++i) {
    const int k = ds.label(i);
    const double mx = static_cast<double>(k % 3) - 1.0;
    const double my = static_cast<double>(k / 3) - 1.0;
    CHECK(std::abs(ds.samples().at(i, 0) - mx) < 1e-6);
    CHECK(std::abs(ds.samples().at(i, 1) - my) < 1e-6);
  }
}

TEST_CASE("gen_toy: fixed seed is bit-reproducible") {
  Rng a(9), b(9);
  Dataset da = gen_toy(200, 0.1, a);
  Dataset db = gen_toy(200, 0.1, b);
  CHECK(da.samples().v == db.samples().v);
  CHECK(da.labels() == db.labels());
}

TEST_CASE("toy mixture description matches the generator layout") {
  const auto means = toy_means();
  REQUIRE(means.size() == 9);
  CHECK(means[0].v == std::vector<double>{-1.0, -1.0});
  CHECK(means[4].v == std::vector<double>{0.0, 0.0});
  CHECK(means[8].v == std::vector<double>{1.0, 1.0});
  const auto covs = toy_covariances(0.1);
  CHECK(covs[3].v == std::vector<double>{0.1, 0.0, 0.0, 0.1});
  const auto w = toy_weights();
  double sum = 0.0;
  for (double x : w) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("load_idx: hand-built fixture parses to exact float values") {
  Dataset ds = load_idx(fixture_images(), fixture_labels());
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 4);
  CHECK(ds.modality() == Modality::Images);
  CHECK(ds.height() == 2);
  CHECK(ds.width() == 2);
  // pixel 0 -> -1, pixel 255 -> +1, 128 -> 128/127.5 - 1, 64 -> 64/127.5 - 1
  CHECK(ds.samples().at(0, 0) == -1.0);
  CHECK(ds.samples().at(0, 1) == 1.0);
  CHECK(ds.samples().at(0, 2) == doctest::Approx(128.0 / 127.5 - 1.0).epsilon(1e-15));
  CHECK(ds.samples().at(0, 3) == doctest::Approx(64.0 / 127.5 - 1.0).epsilon(1e-15));
  CHECK(ds.label(0) == 3);
  CHECK(ds.label(1) == 9);
  for (double v : ds.samples().v) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("load_idx: wrong magic, truncation, count mismatch") {
  // Labels file fed as images: image magic check fires.
  CHECK_THROWS_AS(load_idx(fixture_labels()), FormatError);
  // Images file fed as labels: label magic check fires.
  CHECK_THROWS_AS(load_idx(fixture_images(), fixture_images()), FormatError);

  std::vector<uint8_t> truncated;
  push_be32(truncated, 0x00000803);
  push_be32(truncated, 2);
  push_be32(truncated, 2);
  push_be32(truncated, 2);
  truncated.push_back(0);  // payload should be 8 bytes
  const auto tp = tmp("trunc.idx");
  write_bytes(tp, truncated);
  CHECK_THROWS_AS(load_idx(tp), FormatError);

  const auto mismatched = fixture_labels(3);
  CHECK_THROWS_AS(load_idx(fixture_images(), mismatched), FormatError);

  CHECK_THROWS_AS(load_idx(tmp("missing.idx")), IoError);
}

TEST_CASE("normalize/denormalize round-trip") {
  for (int b = 0; b <= 255; ++b) {
    const double n = normalize_pixel(static_cast<uint8_t>(b));
    CHECK(denormalize_pixel(n) == doctest::Approx(static_cast<double>(b)).epsilon(1e-12));
  }
}

TEST_CASE("subset: stratified counts, determinism, and errors") {
  Rng rng(7);
  Dataset ds = gen_toy(900, 0.1, rng);

  Dataset empty = subset(ds, 0, 1);
  CHECK(empty.size() == 0);

  Dataset one = subset(ds, 1, 1);
  CHECK(one.size() == 9);

  Dataset some = subset(ds, 20, 5);
  CHECK(some.size() == 180);
  std::vector<int64_t> counts(9, 0);
  for (int64_t i = 0; i < some.size(); ++i) ++counts[static_cast<size_t>(some.label(i))];
  for (int64_t c : counts) CHECK(c == 20);

  Dataset again = subset(ds, 20, 5);
  CHECK(again.samples().v == some.samples().v);

  CHECK_THROWS_AS(subset(ds, 100000, 1), ParamError);
}

TEST_CASE("fetch counts reads and validates bounds") {
  Rng rng(8);
  Dataset ds = gen_toy(10, 0.1, rng);
  std::vector<double> row(2);
  CHECK(ds.reads() == 0);
  ds.fetch(3, row);
  ds.fetch(4, row);
  CHECK(ds.reads() == 2);
  CHECK(row[0] == ds.samples().at(4, 0));
  CHECK_THROWS_AS(ds.fetch(10, row), ParamError);
  std::vector<double> bad(3);
  CHECK_THROWS_AS(ds.fetch(0, bad), DimError);
  ds.reset_reads();
  CHECK(ds.reads() == 0);
}

TEST_CASE("synthetic image corpus: geometry, range, balance, determinism") {
  Dataset ds = make_synth_images(20, 42);
  CHECK(ds.size() == 200);
  CHECK(ds.dim() == 28 * 28);
  CHECK(ds.modality() == Modality::Images);
  CHECK(ds.height() == 28);
  CHECK(ds.n_classes() == 10);
  std::vector<int64_t> counts(10, 0);
  for (int64_t i = 0; i < ds.size(); ++i) ++counts[static_cast<size_t>(ds.label(i))];
  for (int64_t c : counts) CHECK(c == 20);
  for (double v : ds.samples().v) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  Dataset again = make_synth_images(20, 42);
  CHECK(again.samples().v == ds.samples().v);
  Dataset other = make_synth_images(20, 43);
  CHECK(other.samples().v != ds.samples().v);
}
