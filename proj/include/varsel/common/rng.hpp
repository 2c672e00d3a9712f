#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace varsel {

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed from a parent seed, a call label and an
/// index. Every stochastic routine takes its stream from here, so results do
/// not depend on which worker executes which task.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                          std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t parent, std::string_view label,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(parent, label, index));
}

/// Uniform random permutation of 0..n-1.
std::vector<int> random_permutation(int n, Rng& rng);

/// n draws from 0..n-1 with replacement.
std::vector<int> bootstrap_indices(int n, Rng& rng);

/// k distinct draws from 0..n-1, returned in random order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

}  // namespace varsel
