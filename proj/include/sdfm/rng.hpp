#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace sdfm::rng {

// Philox4x64 with 10 rounds; round and Weyl constants match numpy's
// implementation, so keystreams are reproducible outside this library.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// Maps a word to (0, 1]: ((w >> 11) + 0.5) * 2^-53. Zero is unreachable (the
// half-step offset), so log of a draw is always finite; the largest word
// rounds up to exactly 1.0.
double to_unit(std::uint64_t word);

// Keystream indexed by (seed, stream): block n is philox4x64((n,0,0,0),
// (seed, stream)). Draws are pure functions of (seed, stream, index), so any
// consumer can be reproduced given those three values.
class BlockStream {
  public:
    BlockStream(std::uint64_t seed, std::uint64_t stream)
        : key_{seed, stream} {}

    std::array<std::uint64_t, 4> block(std::uint64_t index) const {
        return philox4x64({index, 0, 0, 0}, key_);
    }

  private:
    std::array<std::uint64_t, 2> key_;
};

// Uniform draws on (0, 1), four per keystream block, consumed in word order.
class UniformStream {
  public:
    UniformStream(std::uint64_t seed, std::uint64_t stream)
        : blocks_(seed, stream) {}

    double next();
    void fill(double* dst, std::size_t n);

  private:
    BlockStream blocks_;
    std::uint64_t index_ = 0;
    std::array<double, 4> buffer_{};
    int pos_ = 4;
};

// Standard normal draws: each keystream block (w0..w3) yields four values by
// Box-Muller on the unit-interval words,
//   r = sqrt(-2 ln u0), z0 = r cos(2 pi u1), z1 = r sin(2 pi u1)
// and likewise from (u2, u3).
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t stream)
        : blocks_(seed, stream) {}

    double next();
    void fill(double* dst, std::size_t n);

  private:
    BlockStream blocks_;
    std::uint64_t index_ = 0;
    std::array<double, 4> buffer_{};
    int pos_ = 4;
};

}  // namespace sdfm::rng
