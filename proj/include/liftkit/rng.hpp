#pragma once

#include <array>
#include <cstdint>

#include "liftkit/mat.hpp"

namespace liftkit {

// Philox-4x32-10 counter-based generator. The stream is a pure function of
// (seed, stream, block index), so any implementation of the same algorithm
// reproduces it bit for bit; the exact layout is documented in the README.
//
//   key     = (lo32(seed), hi32(seed)), constant per generator
//   counter = (lo32(block), hi32(block), lo32(stream), hi32(stream))
//   block   = number of 128-bit blocks consumed so far
//
// Each block yields four 32-bit words; uniform doubles take 64 bits
// (word0 as low half, word1 as high half) mapped by (u >> 11) * 2^-53.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          stream_(stream) {}

    uint32_t next_u32();
    uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double next_double();
    // floor(u64 * n / 2^64); deterministic integer in [0, n).
    uint64_t next_below(uint64_t n);
    // Standard real Gaussian via Box-Muller; pairs are consumed eagerly so
    // the draw count per call is constant.
    double next_gauss();
    // Standard complex Gaussian, E|z|^2 = 1.
    cplx next_cgauss();

    static std::array<uint32_t, 4> block(const std::array<uint32_t, 2>& key,
                                         const std::array<uint32_t, 4>& counter);

private:
    void refill();

    std::array<uint32_t, 2> key_;
    uint64_t stream_ = 0;
    uint64_t block_index_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
    double gauss_spare_ = 0.0;
    bool has_spare_ = false;
};

// Matrix-valued samplers. All are deterministic functions of the generator
// state; entries are drawn in row-major order.
Mat random_ginibre(Rng& rng, int dim);            // iid standard complex Gaussian
Mat random_hermitian(Rng& rng, int dim);          // GUE-style, (G+G*)/2 with unit-variance entries
Mat random_haar_unitary(Rng& rng, int dim);       // QR of Ginibre with R-diagonal phase fix
Mat random_projection(Rng& rng, int dim, int rank);

} // namespace liftkit
