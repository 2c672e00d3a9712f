#include "varsel/common/rng.hpp"

#include <algorithm>
#include <numeric>

#include "varsel/common/error.hpp"

namespace varsel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                          std::uint64_t index) {
  std::uint64_t h = splitmix64(parent);
  h = splitmix64(h ^ fnv1a(label));
  h = splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return h;
}

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

std::vector<int> bootstrap_indices(int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = pick(rng);
  return out;
}

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  if (k < 0 || k > n) {
    throw InvalidArgument("sample_without_replacement: k out of range");
  }
  // Partial Fisher-Yates.
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace varsel
