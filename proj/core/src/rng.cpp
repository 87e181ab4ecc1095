#include "gmgan/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gmgan/error.hpp"

namespace gmgan {

int64_t Rng::uniform_index(int64_t n) {
  if (n <= 0) throw ParamError("uniform_index requires n > 0");
  // Rejection-free scaling is fine here: n is dataset-sized, far below 2^53.
  return static_cast<int64_t>(uniform() * static_cast<double>(n)) % n;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw ParamError("categorical requires at least one weight");
  const double u = uniform();
  double acc = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size() - 1);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> eng_;
  if (is.fail()) throw FormatError("invalid rng state string");
}

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

uint64_t derive_seed(uint64_t master, uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

uint64_t derive_seed(uint64_t master, const std::string& stream) {
  // FNV-1a over the tag, then mixed with the master seed.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(master, h);
}

}  // namespace gmgan
