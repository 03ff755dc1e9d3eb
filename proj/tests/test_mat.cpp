#include <doctest.h>

#include "liftkit/mat.hpp"
#include "liftkit/rng.hpp"

using namespace liftkit;

TEST_CASE("adjoint is an involution, bit-exactly") {
    Rng rng(11);
    for (int dim : {2, 5, 17}) {
        const Mat a = random_ginibre(rng, dim);
        const Mat b = adjoint(adjoint(a));
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) CHECK(a.at(r, c) == b.at(r, c));
    }
}

TEST_CASE("parallel GEMM agrees with the serial reference bit-for-bit") {
    Rng rng(12);
    for (int dim : {3, 31, 48, 97}) {
        const Mat a = random_ginibre(rng, dim);
        const Mat b = random_ginibre(rng, dim);
        const Mat zs = mul_serial(a, b);
        const Mat zp = mul(a, b);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) CHECK(zs.at(r, c) == zp.at(r, c));
    }
}

TEST_CASE("multiplication against a hand-computed 2x2 product") {
    const Mat a = Mat::from_rows({{cplx(1, 1), cplx(0, 2)}, {cplx(3, 0), cplx(-1, 0)}});
    const Mat b = Mat::from_rows({{cplx(2, 0), cplx(0, 1)}, {cplx(1, -1), cplx(4, 0)}});
    const Mat z = mul(a, b);
    CHECK(z.at(0, 0) == cplx(1, 1) * cplx(2, 0) + cplx(0, 2) * cplx(1, -1));
    CHECK(z.at(0, 1) == cplx(1, 1) * cplx(0, 1) + cplx(0, 2) * cplx(4, 0));
    CHECK(z.at(1, 0) == cplx(3, 0) * cplx(2, 0) + cplx(-1, 0) * cplx(1, -1));
    CHECK(z.at(1, 1) == cplx(3, 0) * cplx(0, 1) + cplx(-1, 0) * cplx(4, 0));
}

TEST_CASE("non-finite entries are rejected") {
    Mat a = Mat::identity(2);
    a.at(0, 1) = cplx(std::numeric_limits<double>::infinity(), 0);
    CHECK_FALSE(a.finite());
    CHECK_THROWS_AS(a.require_finite("test"), Error);
}

TEST_CASE("dimension mismatches are shape errors") {
    const Mat a = Mat::identity(2);
    const Mat b = Mat::identity(3);
    try {
        (void)mul(a, b);
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
}

TEST_CASE("direct sums and block extraction round-trip") {
    Rng rng(13);
    const Mat a = random_ginibre(rng, 3);
    const Mat b = random_ginibre(rng, 2);
    const Mat s = direct_sum(a, b);
    CHECK(s.dim() == 5);
    CHECK(max_abs(extract_block(s, 0, 0, 3) - a) == 0.0);
    CHECK(max_abs(extract_block(s, 3, 3, 2) - b) == 0.0);
    CHECK(s.at(0, 4) == cplx(0.0));
    CHECK(s.at(4, 0) == cplx(0.0));
}
