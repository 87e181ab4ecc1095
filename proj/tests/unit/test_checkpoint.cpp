#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gmgan/checkpoint.hpp"
#include "gmgan/rng.hpp"

using namespace gmgan;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::filesystem::path tmp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "gmgan_ckpt_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("parameter stores round-trip bit-exactly") {
  ParamStore p;
  p.add("w", Tensor({2, 2}, {0.1, -1e-300, 3.141592653589793, -0.0}));
  p.add("b", Tensor({3}, {1e300, 2.2250738585072014e-308, 42.0}));

  Json j = params_to_json(p);
  ParamStore q = params_from_json(j);
  REQUIRE(q.size() == 2);
  for (auto ia = p.begin(), ib = q.begin(); ia != p.end(); ++ia, ++ib) {
    CHECK(ia->first == ib->first);
    CHECK(ia->second.shape == ib->second.shape);
    for (size_t i = 0; i < ia->second.v.size(); ++i) {
      // Bit-level equality, not just ==, so -0.0 and subnormals count.
      CHECK(std::bit_cast<uint64_t>(ia->second.v[i]) == std::bit_cast<uint64_t>(ib->second.v[i]));
    }
  }
}

TEST_CASE("checkpoint write -> read -> write is byte-identical") {
  ParamStore p;
  Rng rng(77);
  for (int i = 0; i < 3; ++i) {
    Tensor t = Tensor::zeros({4, 3});
    for (double& x : t.v) x = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    p.add("t" + std::to_string(i), std::move(t));
  }
  const auto path1 = tmp_file("a.json");
  const auto path2 = tmp_file("b.json");
  Json body;
  body["params"] = params_to_json(p);
  write_checkpoint(path1, "test-kind", body);

  Json doc = read_checkpoint(path1, "test-kind");
  Json body2;
  body2["params"] = doc.at("params");
  write_checkpoint(path2, "test-kind", body2);
  CHECK(slurp(path1) == slurp(path2));
}

TEST_CASE("corrupt or missing format_version raises FormatError") {
  const auto path = tmp_file("bad.json");
  {
    std::ofstream out(path);
    out << "{\"format_version\": 999, \"kind\": \"test-kind\"}\n";
  }
  CHECK_THROWS_AS(read_checkpoint(path, "test-kind"), FormatError);
  {
    std::ofstream out(path);
    out << "{\"kind\": \"test-kind\"}\n";
  }
  CHECK_THROWS_AS(read_checkpoint(path, "test-kind"), FormatError);
  {
    std::ofstream out(path);
    out << "not json at all {{{\n";
  }
  CHECK_THROWS_AS(read_checkpoint(path, "test-kind"), FormatError);
}

TEST_CASE("kind mismatch raises FormatError") {
  const auto path = tmp_file("kind.json");
  write_checkpoint(path, "alpha", Json::object());
  CHECK_THROWS_AS(read_checkpoint(path, "beta"), FormatError);
  CHECK_NOTHROW(read_checkpoint(path, "alpha"));
}

TEST_CASE("mlp spec and adam state round-trip") {
  MlpSpec s;
  s.widths = {4, 8, 2};
  s.acts = {Act::LeakyRelu, Act::Sigmoid};
  s.leaky_slope = 0.15;
  MlpSpec s2 = mlp_spec_from_json(mlp_spec_to_json(s));
  CHECK(s2.widths == s.widths);
  CHECK(s2.acts == s.acts);
  CHECK(s2.leaky_slope == s.leaky_slope);

  ParamStore p;
  p.add("x", Tensor({2}, {1.0, 2.0}));
  AdamConfig cfg;
  cfg.lr = 0.007;
  AdamState st(p, cfg);
  p.get("x").ensure_grad();
  (*p.get("x").grad)[0] = 0.3;
  (*p.get("x").grad)[1] = -0.6;
  adam_step(p, st);

  AdamState st2 = adam_from_json(adam_to_json(st));
  CHECK(st2.t() == st.t());
  CHECK(st2.config().lr == cfg.lr);
  REQUIRE(st2.moments1().size() == 1);
  CHECK(st2.moments1()[0].second.v == st.moments1()[0].second.v);
  CHECK(st2.moments2()[0].second.v == st.moments2()[0].second.v);
}
