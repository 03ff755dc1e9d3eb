#include <doctest.h>

#include <cmath>

#include "liftkit/block_algebra.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/spectral.hpp"

using namespace liftkit;

namespace {

Mat random_block_diagonal(Rng& rng, const BlockAlgebra& alg) {
    Mat a = Mat::zeros(alg.total_dim());
    for (size_t b = 0; b < alg.block_count(); ++b)
        paste_block(a, random_ginibre(rng, alg.block_dims()[b]), alg.block_offset(b),
                    alg.block_offset(b));
    return a;
}

} // namespace

TEST_CASE("weights must be a state") {
    CHECK_THROWS_AS(BlockAlgebra({2, 3}, {0.5, 0.6}), Error);
    CHECK_THROWS_AS(BlockAlgebra({2, 3}, {1.2, -0.2}), Error);
    const BlockAlgebra alg = BlockAlgebra::proportional({2, 3});
    CHECK(alg.weights()[0] == doctest::Approx(0.4));
    CHECK(alg.weights()[1] == doctest::Approx(0.6));
}

TEST_CASE("tau is a tracial state: tau(1) = 1 and tau(ab) = tau(ba)") {
    Rng rng(31);
    const BlockAlgebra alg = BlockAlgebra::proportional({2, 3, 4});
    CHECK(alg.trace(Mat::identity(alg.total_dim())).real() == doctest::Approx(1.0));
    for (int trial = 0; trial < 25; ++trial) {
        const Mat a = random_block_diagonal(rng, alg);
        const Mat b = random_block_diagonal(rng, alg);
        const cplx ab = alg.trace(mul(a, b));
        const cplx ba = alg.trace(mul(b, a));
        CHECK(std::abs(ab - ba) < 1e-10);
    }
}

TEST_CASE("p-norm pinned values") {
    const BlockAlgebra m2 = BlockAlgebra::full(2);
    // Identity in any algebra has every p-norm 1.
    for (double p : {1.0, 2.0, 3.5, 7.0})
        CHECK(m2.p_norm(Mat::identity(2), p) == doctest::Approx(1.0).epsilon(1e-12));
    // Rank-1 projection in M2: tau(P) = 1/2, so the 2-norm is sqrt(1/2).
    CHECK(m2.p_norm(Mat::diag({1.0, 0.0}), 2.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // diag(1,2): 1-norm is the mean of the singular values.
    CHECK(m2.p_norm(Mat::diag({1.0, 2.0}), 1.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("p < 1 and shape mismatches are rejected") {
    const BlockAlgebra m2 = BlockAlgebra::full(2);
    try {
        (void)m2.p_norm(Mat::identity(2), 0.5);
        FAIL("expected invalid parameter");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidParameter);
    }
    try {
        (void)m2.p_norm(Mat::identity(3), 2.0);
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
    // Off-block entries are rejected for multi-block algebras.
    const BlockAlgebra two = BlockAlgebra::proportional({1, 1});
    Mat offdiag = Mat::identity(2);
    offdiag.at(0, 1) = 0.3;
    CHECK_THROWS_AS((void)two.p_norm(offdiag, 2.0), Error);
}

TEST_CASE("2-norm shortcut agrees with the eigenvalue route") {
    Rng rng(32);
    const BlockAlgebra alg = BlockAlgebra::proportional({3, 5});
    for (int trial = 0; trial < 10; ++trial) {
        const Mat a = random_block_diagonal(rng, alg);
        CHECK(alg.norm2(a) == doctest::Approx(alg.p_norm(a, 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("p-norm laws: monotone in p, dominated by the operator norm") {
    Rng rng(33);
    for (int trial = 0; trial < 60; ++trial) {
        const bool split = trial % 2 == 0;
        const BlockAlgebra alg =
            split ? BlockAlgebra::proportional({2, 3}) : BlockAlgebra::full(4);
        Mat a = random_block_diagonal(rng, alg);
        const double p = 1.0 + 6.0 * rng.next_double();
        const double q = p + 4.0 * rng.next_double();
        const double np = alg.p_norm(a, p);
        const double nq = alg.p_norm(a, q);
        CHECK(np <= nq + 1e-10);
        CHECK(nq <= op_norm(a) + 1e-10);
        // Contraction inequality for ||a|| <= 1 and p >= 2.
        a = cplx(1.0 / op_norm(a)) * a;
        const double pp = 2.0 + 5.0 * rng.next_double();
        const double c2 = alg.p_norm(a, 2.0);
        CHECK(std::pow(alg.p_norm(a, pp), pp) <= c2 * c2 + 1e-10);
    }
}

TEST_CASE("faithfulness: vanishing p-norm only at zero") {
    const BlockAlgebra alg = BlockAlgebra::proportional({2, 2});
    Mat a = Mat::zeros(4);
    CHECK(alg.p_norm(a, 1.5) == 0.0);
    a.at(3, 3) = 1e-3;
    for (double p : {1.0, 2.0, 4.0}) CHECK(alg.p_norm(a, p) > 0.0);
}

TEST_CASE("comparable projections: ||A - P||_2 = sqrt(|tau(P) - tau(A)|)") {
    Rng rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 4 + static_cast<int>(rng.next_below(9));
        const BlockAlgebra alg = BlockAlgebra::full(dim);
        const Mat u = random_haar_unitary(rng, dim);
        const int r_small = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(dim - 1)));
        const int r_big =
            r_small + static_cast<int>(rng.next_below(static_cast<uint64_t>(dim - r_small)));
        auto span_projection = [&](int rank) {
            Mat p(dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) {
                    cplx acc = 0.0;
                    for (int k = 0; k < rank; ++k) acc += u.at(r, k) * std::conj(u.at(c, k));
                    p.at(r, c) = acc;
                }
            return p;
        };
        const Mat small = span_projection(r_small);
        const Mat big = span_projection(r_big);
        const double lhs = alg.norm2(small - big);
        const double rhs =
            std::sqrt(std::abs(alg.trace(big).real() - alg.trace(small).real()));
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}
