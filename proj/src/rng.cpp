#include "sdfm/rng.hpp"

#include <cmath>

namespace sdfm::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> x,
                                        std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, x[0], hi0, lo0);
        mulhilo(kMul1, x[2], hi1, lo1);
        x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return x;
}

double to_unit(std::uint64_t word) {
    return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

double UniformStream::next() {
    if (pos_ == 4) {
        auto words = blocks_.block(index_++);
        for (int i = 0; i < 4; ++i) buffer_[i] = to_unit(words[i]);
        pos_ = 0;
    }
    return buffer_[pos_++];
}

void UniformStream::fill(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = next();
}

double NormalStream::next() {
    if (pos_ == 4) {
        auto words = blocks_.block(index_++);
        const double u0 = to_unit(words[0]);
        const double u1 = to_unit(words[1]);
        const double u2 = to_unit(words[2]);
        const double u3 = to_unit(words[3]);
        const double r0 = std::sqrt(-2.0 * std::log(u0));
        const double r2 = std::sqrt(-2.0 * std::log(u2));
        constexpr double two_pi = 6.283185307179586476925286766559;
        buffer_ = {r0 * std::cos(two_pi * u1), r0 * std::sin(two_pi * u1),
                   r2 * std::cos(two_pi * u3), r2 * std::sin(two_pi * u3)};
        pos_ = 0;
    }
    return buffer_[pos_++];
}

void NormalStream::fill(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = next();
}

}  // namespace sdfm::rng
