#include <doctest.h>

#include <cmath>

#include "liftkit/mat.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/spectral.hpp"

using namespace liftkit;

// Known-answer vectors for Philox-4x32-10 from the reference test suite.
TEST_CASE("philox 4x32-10 known-answer vectors") {
    {
        const auto out = Rng::block({0u, 0u}, {0u, 0u, 0u, 0u});
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = Rng::block({0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const auto out = Rng::block({0xa4093822u, 0x299f31d0u},
                                    {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("identical seeds give bit-identical streams") {
    Rng a(123456789), b(123456789);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(123456789), d(987654321);
    int diff = 0;
    for (int i = 0; i < 16; ++i) diff += (c.next_u64() != d.next_u64());
    CHECK(diff > 0);
}

TEST_CASE("uniform doubles stay in [0,1) and have a sane mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("gaussian moments") {
    Rng rng(8);
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gauss();
        mean += g;
        var += g * g;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("haar samples are unitary to working precision") {
    Rng rng(9);
    for (int dim : {2, 8, 24}) {
        const Mat u = random_haar_unitary(rng, dim);
        const Mat g = mul(adjoint(u), u);
        CHECK(max_abs(g - Mat::identity(dim)) < 1e-12);
    }
}

TEST_CASE("random projections are contract-exact with the requested rank") {
    Rng rng(10);
    for (int rank : {1, 3, 5}) {
        const Mat p = random_projection(rng, 6, rank);
        CHECK(projection_defect(p) < 1e-12);
        CHECK(projection_rank(p) == rank);
    }
}
