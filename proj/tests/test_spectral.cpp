#include <doctest.h>

#include <cmath>

#include "liftkit/mat.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/scalar_fn.hpp"
#include "liftkit/spectral.hpp"

using namespace liftkit;

namespace {

// Test-only Gauss-Jordan inverse; independent of the eigendecomposition
// path it checks.
Mat gauss_jordan_inverse(const Mat& a) {
    const int n = a.dim();
    Mat work = a;
    Mat inv = Mat::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(work.at(r, col)) > std::abs(work.at(piv, col))) piv = r;
        REQUIRE(std::abs(work.at(piv, col)) > 1e-14);
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(work.at(piv, c), work.at(col, c));
                std::swap(inv.at(piv, c), inv.at(col, c));
            }
        const cplx d = work.at(col, col);
        for (int c = 0; c < n; ++c) {
            work.at(col, c) /= d;
            inv.at(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = work.at(r, col);
            if (f == cplx(0.0)) continue;
            for (int c = 0; c < n; ++c) {
                work.at(r, c) -= f * work.at(col, c);
                inv.at(r, c) -= f * inv.at(col, c);
            }
        }
    }
    return inv;
}

// Test-only power iteration on A*A; independent largest-singular-value
// oracle.
double power_iteration_opnorm(const Mat& a, int iters = 400) {
    const Mat g = mul(adjoint(a), a);
    const int n = a.dim();
    std::vector<cplx> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = cplx(1.0 / std::sqrt(n), 0.0);
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<cplx> w(static_cast<size_t>(n), 0.0);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) w[static_cast<size_t>(r)] += g.at(r, c) * v[static_cast<size_t>(c)];
        double nrm = 0.0;
        for (const cplx& x : w) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (cplx& x : w) x /= nrm;
        lam = nrm;
        v = std::move(w);
    }
    return std::sqrt(lam);
}

} // namespace

TEST_CASE("op_norm on pinned examples") {
    CHECK(op_norm(Mat::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(op_norm(Mat::diag({0.5, -2.0})) == doctest::Approx(2.0).epsilon(1e-12));
    // Nilpotent shift: singular values {1, 0}.
    const Mat shift = Mat::from_rows({{0.0, 1.0}, {0.0, 0.0}});
    CHECK(op_norm(shift) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("op_norm properties against the power-iteration oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + static_cast<int>(rng.next_below(10));
        const Mat a = random_ginibre(rng, dim);
        const Mat b = random_ginibre(rng, dim);
        const double na = op_norm(a);
        CHECK(na == doctest::Approx(power_iteration_opnorm(a)).epsilon(1e-6));
        CHECK(op_norm(adjoint(a)) == doctest::Approx(na).epsilon(1e-10));
        CHECK(op_norm(mul(a, b)) <= na * op_norm(b) + 1e-9);
    }
}

TEST_CASE("herm_eig reconstructs and orders ascending") {
    Rng rng(22);
    for (int dim : {2, 7, 16}) {
        const Mat h = random_hermitian(rng, dim);
        EigH e = herm_eig(h);
        for (size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i] >= e.values[i - 1]);
        const Mat rebuilt = assemble_from_eig(e, e.values);
        CHECK(max_abs(rebuilt - h) < 1e-12 * dim);
        const Mat gram = mul(adjoint(e.vectors), e.vectors);
        CHECK(max_abs(gram - Mat::identity(dim)) < 1e-12);
    }
}

TEST_CASE("herm_eig rejects clearly non-Hermitian input") {
    Mat a = Mat::identity(3);
    a.at(0, 1) = cplx(0.5, 0.5);
    try {
        (void)herm_eig(a);
        FAIL("expected symmetry error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SymmetryError);
    }
}

TEST_CASE("herm_calculus with the identity map is the identity") {
    Rng rng(23);
    const Mat h = random_hermitian(rng, 9);
    CHECK(max_abs(herm_calculus(h, scalar_fns::identity_map()) - h) < 1e-12 * 9);
}

TEST_CASE("herm_calculus with the retraction rounds diag(0.05, 0.95)") {
    const Mat a = Mat::diag({0.05, 0.95});
    const Mat p = herm_calculus(a, scalar_fns::projection_retraction());
    CHECK(max_abs(p - Mat::diag({0.0, 1.0})) < 1e-14);
}

TEST_CASE("inverse square root squares to the inverse (Gauss-Jordan oracle)") {
    Rng rng(24);
    for (int trial = 0; trial < 5; ++trial) {
        const int dim = 6;
        // Hermitian with spectrum in [3/4, 5/4].
        Mat h = random_hermitian(rng, dim);
        EigH e = herm_eig(h);
        std::vector<double> squeezed(e.values.size());
        const double lo = e.values.front(), hi = e.values.back();
        for (size_t i = 0; i < e.values.size(); ++i)
            squeezed[i] = 0.75 + 0.5 * (e.values[i] - lo) / (hi - lo);
        const Mat a = assemble_from_eig(e, squeezed);
        const Mat isr = herm_calculus(a, scalar_fns::inv_sqrt());
        const Mat inv_from_calc = mul(isr, isr);
        const Mat inv_oracle = gauss_jordan_inverse(a);
        CHECK(max_abs(inv_from_calc - inv_oracle) < 1e-9);
        // Functional calculus commutes with its argument.
        CHECK(max_abs(commutator(isr, a)) < 1e-10 * dim);
    }
}

TEST_CASE("herm_calculus names the offending eigenvalue on domain errors") {
    const Mat a = Mat::diag({-4.0, 1.0});
    try {
        (void)herm_calculus(a, scalar_fns::inv_sqrt());
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DomainError);
        CHECK(std::string(e.what()).find("-4.0") != std::string::npos);
    }
}

TEST_CASE("svd reconstructs") {
    Rng rng(25);
    const int dim = 8;
    const Mat a = random_ginibre(rng, dim);
    Svd s = svd(a);
    Mat rebuilt(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < dim; ++k)
                acc += s.u.at(r, k) * s.sigma[static_cast<size_t>(k)] * s.vh.at(k, c);
            rebuilt.at(r, c) = acc;
        }
    CHECK(max_abs(rebuilt - a) < 1e-12 * dim);
    for (size_t i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma[i] <= s.sigma[i - 1]);
}

TEST_CASE("normal_eig diagonalizes unitaries and rejects non-normal input") {
    Rng rng(26);
    const Mat u = random_haar_unitary(rng, 6);
    EigNormal e = normal_eig(u);
    for (const cplx& lam : e.values) CHECK(std::abs(std::abs(lam) - 1.0) < 1e-10);
    Mat rebuilt(6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < 6; ++k)
                acc += e.vectors.at(r, k) * e.values[static_cast<size_t>(k)] *
                       std::conj(e.vectors.at(c, k));
            rebuilt.at(r, c) = acc;
        }
    CHECK(max_abs(rebuilt - u) < 1e-10);

    const Mat shift = Mat::from_rows({{0.0, 1.0}, {0.0, 0.0}});
    CHECK_THROWS_AS((void)normal_eig(shift), Error);
}
