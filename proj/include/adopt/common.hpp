#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace adopt {

using EntityId = std::uint64_t;
using ItemId = std::uint64_t;

/// One-based week index; week 0 is the conceptual start of the horizon.
using Week = int;

/// Dense position of an entity inside a Dataset (0 .. n-1).
using Index = std::uint32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent RNG streams from a master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t h = mix_seed(seed);
  h = mix_seed(h ^ a);
  h = mix_seed(h ^ b);
  return mix_seed(h ^ c);
}

/// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
template <class Engine>
double unit_uniform(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must be independent.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// 0 means "use all available cores".
unsigned resolve_threads(unsigned requested);

}  // namespace adopt
