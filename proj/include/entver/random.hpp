#pragma once

// Seeded random streams and random-object generators.
//
// Every stochastic routine takes an explicit seed. Parallel loops derive one
// substream per work item from (seed, index), so results never depend on the
// thread schedule.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "entver/qmat.hpp"

namespace entver {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the `index`-th independent substream of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

double uniform01(Rng& rng);

/// Draws an index with probability proportional to `weights` (nonnegative, positive sum).
int sample_index(std::span<const double> weights, Rng& rng);

/// Haar-random unitary (QR of a complex Ginibre matrix with phase fix).
CMatrix random_unitary(int dim, Rng& rng);

/// Random density matrix of the given rank from the induced (Hilbert-Schmidt for rank = dim) measure.
CMatrix random_density(int dim, Rng& rng, int rank = -1);

/// Random contraction with operator norm at most 1.
CMatrix random_contraction(int dim, Rng& rng);

/// Uniformly random pure qubit state.
CVector random_qubit_ket(Rng& rng);

}  // namespace entver
