#include <doctest.h>

#include <cmath>

#include "liftkit/ncexpr.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/scalar_fn.hpp"
#include "liftkit/spectral.hpp"

using namespace liftkit;

namespace {

Mat conj_by(const Mat& w, const Mat& a) { return mul(mul(adjoint(w), a), w); }

// Random expression of bounded depth; herm_calc nodes wrap the Hermitian
// part of their argument so the retraction's domain is all of R.
NcExpr random_expr(Rng& rng, int arity, int depth) {
    if (depth == 0 || rng.next_below(4) == 0) {
        const uint64_t pick = rng.next_below(static_cast<uint64_t>(arity) + 1);
        return pick == static_cast<uint64_t>(arity) ? NcExpr::unit()
                                                    : NcExpr::var(static_cast<int>(pick));
    }
    switch (rng.next_below(5)) {
        case 0: return random_expr(rng, arity, depth - 1) + random_expr(rng, arity, depth - 1);
        case 1: return random_expr(rng, arity, depth - 1) * random_expr(rng, arity, depth - 1);
        case 2: return random_expr(rng, arity, depth - 1).adj();
        case 3: {
            const cplx s(rng.next_gauss(), rng.next_gauss());
            return s * random_expr(rng, arity, depth - 1);
        }
        default: {
            const NcExpr inner = random_expr(rng, arity, depth - 1);
            const NcExpr herm = cplx(0.5) * (inner + inner.adj());
            return herm.herm_calc(scalar_fns::projection_retraction());
        }
    }
}

} // namespace

TEST_CASE("eval pinned example: x*x on the nilpotent shift") {
    const NcExpr x = NcExpr::var(0);
    const Mat shift = Mat::from_rows({{0.0, 1.0}, {0.0, 0.0}});
    const Mat v = eval(x.adj() * x, {shift});
    CHECK(max_abs(v - Mat::diag({0.0, 1.0})) < 1e-15);
}

TEST_CASE("eval pinned example: retraction of the Hermitian part") {
    const NcExpr x = NcExpr::var(0);
    const NcExpr h = (cplx(0.5) * (x + x.adj())).herm_calc(scalar_fns::projection_retraction());
    const Mat v = eval(h, {Mat::diag({0.05, 0.95})});
    CHECK(max_abs(v - Mat::diag({0.0, 1.0})) < 1e-14);
}

TEST_CASE("arity and shape violations") {
    const NcExpr e = NcExpr::var(1);
    CHECK_THROWS_AS((void)eval(e, {Mat::identity(2)}), Error);
    const NcExpr f = NcExpr::var(0) * NcExpr::var(1);
    CHECK_THROWS_AS((void)eval(f, {Mat::identity(2), Mat::identity(3)}), Error);
}

TEST_CASE("projection relation: zero set and pinned defects") {
    const NcExpr phi = rel_projection();
    CHECK(op_norm(eval(phi, {Mat::diag({1.0, 0.0})})) < 1e-15);
    // Scalar 0.5: (0.5 - 0.25)^2.
    const Mat half = Mat::from_rows({{0.5}});
    CHECK(op_norm(eval(phi, {half})) == doctest::Approx(0.0625).epsilon(1e-12));
    // Nilpotent shift: phi = diag(-1, 0), operator norm 1.
    const Mat shift = Mat::from_rows({{0.0, 1.0}, {0.0, 0.0}});
    CHECK(op_norm(eval(phi, {shift})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unitary equivariance of evaluation, depth up to 5") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const int arity = 1 + static_cast<int>(rng.next_below(2));
        const NcExpr e = random_expr(rng, arity, 4).with_arity(arity);
        const int dim = 3 + static_cast<int>(rng.next_below(4));
        std::vector<Mat> args;
        for (int j = 0; j < arity; ++j)
            args.push_back(cplx(0.5 / std::sqrt(dim)) * random_ginibre(rng, dim));
        const Mat w = random_haar_unitary(rng, dim);
        std::vector<Mat> conj_args;
        for (const Mat& a : args) conj_args.push_back(conj_by(w, a));
        const Mat lhs = eval(e, conj_args);
        const Mat rhs = conj_by(w, eval(e, args));
        CHECK(op_norm(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("direct-sum equivariance of evaluation") {
    Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const int arity = 1 + static_cast<int>(rng.next_below(2));
        const NcExpr e = random_expr(rng, arity, 4).with_arity(arity);
        const int d1 = 2 + static_cast<int>(rng.next_below(3));
        const int d2 = 2 + static_cast<int>(rng.next_below(3));
        std::vector<Mat> a1, a2, sums;
        for (int j = 0; j < arity; ++j) {
            a1.push_back(cplx(0.4) * random_ginibre(rng, d1));
            a2.push_back(cplx(0.4) * random_ginibre(rng, d2));
            sums.push_back(direct_sum(a1.back(), a2.back()));
        }
        const Mat lhs = eval(e, sums);
        const Mat rhs = direct_sum(eval(e, a1), eval(e, a2));
        CHECK(op_norm(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("polynomial approximants of a calculus node converge on a bounded set") {
    // Chebyshev interpolants of the retraction on [-2, 2], evaluated as
    // matrix polynomials, against the functional-calculus node.
    const ScalarFn h = scalar_fns::projection_retraction();
    Rng rng(43);
    std::vector<Mat> test_set;
    for (int i = 0; i < 5; ++i) {
        Mat g = random_hermitian(rng, 6);
        test_set.push_back(cplx(1.0 / op_norm(g)) * g);
    }
    auto cheb_error = [&](int degree) {
        // Chebyshev interpolation coefficients on [-2, 2] (discrete cosine
        // sums over first-kind nodes), then the matrix three-term
        // recurrence on the rescaled argument.
        const int n_nodes = degree + 1;
        std::vector<double> coef(static_cast<size_t>(n_nodes), 0.0);
        for (int k = 0; k < n_nodes; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n_nodes; ++j) {
                const double theta = M_PI * (j + 0.5) / n_nodes;
                acc += h(2.0 * std::cos(theta)) * std::cos(k * theta);
            }
            coef[static_cast<size_t>(k)] = (k == 0 ? 1.0 : 2.0) * acc / n_nodes;
        }
        double worst = 0.0;
        for (const Mat& a : test_set) {
            const int n = a.dim();
            const Mat s = cplx(0.5) * a; // spectrum into [-1, 1]
            Mat t_prev = Mat::identity(n);
            Mat t_cur = s;
            Mat acc = cplx(coef[0]) * t_prev + cplx(coef[1]) * t_cur;
            for (int k = 2; k < n_nodes; ++k) {
                Mat t_next = cplx(2.0) * mul(s, t_cur) - t_prev;
                acc = acc + cplx(coef[static_cast<size_t>(k)]) * t_next;
                t_prev = std::move(t_cur);
                t_cur = std::move(t_next);
            }
            worst = std::max(worst, op_norm(acc - herm_calculus(a, h)));
        }
        return worst;
    };
    const double e8 = cheb_error(8);
    const double e32 = cheb_error(32);
    const double e128 = cheb_error(128);
    CHECK(e32 < e8);
    CHECK(e128 < e32);
    CHECK(e128 < 0.05);
}

TEST_CASE("glue relation vanishes exactly on glued partial isometries") {
    // V = E_21 in M2: V*V = diag(1,0), VV* = diag(0,1).
    const NcExpr phi = rel_projections(1);
    const NcExpr psi = rel_projections(1);
    const NcExpr glue_rel = rel_glue(phi, psi, 1);
    const Mat v = Mat::from_rows({{0.0, 0.0}, {1.0, 0.0}});
    CHECK(op_norm(eval(glue_rel, {v})) < 1e-14);
    // A random contraction that is not a partial isometry has positive defect.
    Rng rng(44);
    Mat g = random_ginibre(rng, 3);
    g = cplx(0.6 / op_norm(g)) * g;
    CHECK(op_norm(eval(glue_rel, {g})) > 1e-4);
}

TEST_CASE("tensor relation vanishes on exact tensor data") {
    // x = T (x) 1 (here T = diag(2,3) (x) 1_2), y = shift (x) 1_2.
    const NcExpr phi = rel_projections(1).compose({NcExpr::var(0) - NcExpr::var(0)}).with_arity(1);
    // phi == 0: place no constraint on x beyond commutation.
    const NcExpr rel = rel_tensor(phi, rel_block_generator(2));
    Mat x(4), y(4);
    // Block shift: e_{12} (x) 1_2 in block layout (rows 0,1 | 2,3); its
    // commutant is 1_2 (x) M_2, so x = 1 (x) diag(2, 3).
    y.at(0, 2) = 1.0;
    y.at(1, 3) = 1.0;
    x.at(0, 0) = 2.0;
    x.at(1, 1) = 3.0;
    x.at(2, 2) = 2.0;
    x.at(3, 3) = 3.0;
    CHECK(op_norm(eval(rel, {x, y})) < 1e-13);
    // Perturbing the commutation breaks it.
    x.at(0, 2) = 0.1;
    CHECK(op_norm(eval(rel, {x, y})) > 1e-4);
}

TEST_CASE("direct-sum relation: all seven summand groups vanish on exact data") {
    const NcExpr rel = rel_direct_sum(rel_projections(1), rel_projections(1));
    CHECK(rel.arity() == 3);
    // x supported under p, y under 1-p, both projections.
    const Mat p = Mat::diag({1.0, 1.0, 0.0, 0.0});
    const Mat x = Mat::diag({1.0, 0.0, 0.0, 0.0});
    const Mat y = Mat::diag({0.0, 0.0, 1.0, 0.0});
    CHECK(op_norm(eval(rel, {x, y, p})) < 1e-14);
    // A central perturbation gives a defect scaling linearly in epsilon.
    Rng rng(45);
    const Mat h = random_hermitian(rng, 4);
    std::vector<double> defects;
    for (double eps : {0.001, 0.002, 0.004, 0.008}) {
        const Mat pp = p + cplx(eps) * h;
        defects.push_back(op_norm(eval(rel, {x, y, pp})));
    }
    for (size_t i = 1; i < defects.size(); ++i) {
        CHECK(defects[i] > defects[i - 1]);
        CHECK(defects[i] < 3.0 * 2.0 * defects[i - 1]); // roughly linear slope
    }
}

TEST_CASE("defect report: per-summand breakdown and the sqrt domination") {
    const BlockAlgebra alg = BlockAlgebra::full(2);
    Rng rng(46);
    Mat g = random_ginibre(rng, 2);
    g = cplx(0.7 / op_norm(g)) * g;
    const NcExpr rel = rel_glue(rel_projections(1), rel_projections(1), 1);
    const DefectReport rep = defect(rel, {g}, alg, {2.0, 4.0}, "glue");
    CHECK(rep.relation_id == "glue");
    CHECK(rep.summands.size() == 2);
    for (const auto& s : rep.summands) {
        CHECK(s.op_defect <= rep.op_defect + 1e-10);
        CHECK(std::sqrt(s.op_defect) <= std::sqrt(rep.op_defect) + 1e-10);
    }
    CHECK(rep.p_defects.count(2.0) == 1);
    CHECK(rep.p_defects.count(4.0) == 1);
    CHECK(rep.p_defects.at(2.0) <= rep.op_defect + 1e-12);
}

TEST_CASE("defect pinned example: scalar 0.5 against the projection relation") {
    const BlockAlgebra alg = BlockAlgebra::full(1);
    const DefectReport rep =
        defect(rel_projection(), {Mat::from_rows({{0.5}})}, alg, {2.0}, "projection");
    CHECK(rep.op_defect == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(rep.p_defects.at(2.0) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("commutator relation on the clock/shift pair at n = 8") {
    const int n = 8;
    Mat u(n), v(n);
    for (int k = 0; k < n; ++k) {
        u.at(k, k) = std::exp(cplx(0, 2.0 * M_PI * k / n));
        v.at((k + 1) % n, k) = 1.0;
    }
    const BlockAlgebra alg = BlockAlgebra::full(n);
    const DefectReport rep = defect(rel_commutator(), {u, v}, alg, {2.0}, "commutator");
    CHECK(rep.p_defects.at(2.0) == doctest::Approx(2.0 * std::sin(M_PI / n)).epsilon(1e-12));
}

TEST_CASE("relation lookup by name") {
    CHECK(relation_by_name("projection", 1).arity() == 1);
    CHECK(relation_by_name("glue", 3).arity() == 3);
    CHECK(relation_by_name("direct_sum", 1).arity() == 3);
    CHECK(relation_by_name("commutator", 2).arity() == 2);
    CHECK_THROWS_AS((void)relation_by_name("no_such_relation", 1), Error);
}
