#include "liftkit/correct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "liftkit/spectral.hpp"

namespace liftkit {

// --- MatrixUnitSystem ---------------------------------------------------

MatrixUnitSystem MatrixUnitSystem::empty(std::vector<int> structure, int ambient_dim) {
    MatrixUnitSystem s;
    s.structure = std::move(structure);
    s.ambient_dim = ambient_dim;
    for (int nb : s.structure) {
        if (nb <= 0) fail(ErrorCode::InvalidInput, "MatrixUnitSystem: nonpositive block size");
        s.units.emplace_back(static_cast<size_t>(nb) * nb, Mat::zeros(ambient_dim));
    }
    return s;
}

const Mat& MatrixUnitSystem::unit(size_t b, int s, int t) const {
    const int nb = structure[b];
    return units[b][static_cast<size_t>(s) * nb + t];
}

Mat& MatrixUnitSystem::unit(size_t b, int s, int t) {
    const int nb = structure[b];
    return units[b][static_cast<size_t>(s) * nb + t];
}

double MatrixUnitSystem::relation_defect() const {
    double worst = 0.0;
    Mat diag_sum = Mat::zeros(ambient_dim);
    for (size_t b = 0; b < structure.size(); ++b) {
        const int nb = structure[b];
        for (int s = 0; s < nb; ++s) {
            diag_sum = diag_sum + unit(b, s, s);
            for (int t = 0; t < nb; ++t) {
                worst = std::max(worst, fro_norm(adjoint(unit(b, s, t)) - unit(b, t, s)));
                for (int u = 0; u < nb; ++u)
                    for (int v = 0; v < nb; ++v) {
                        Mat prod = mul(unit(b, s, t), unit(b, u, v));
                        if (t == u) prod = prod - unit(b, s, v);
                        worst = std::max(worst, fro_norm(prod));
                    }
            }
        }
    }
    worst = std::max(worst, fro_norm(diag_sum - Mat::identity(ambient_dim)));
    return worst;
}

double MatrixUnitSystem::generator_defect() const {
    double worst = 0.0;
    Mat diag_sum = Mat::zeros(ambient_dim);
    for (size_t b = 0; b < structure.size(); ++b) {
        const int nb = structure[b];
        const Mat& e11 = unit(b, 0, 0);
        worst = std::max(worst, fro_norm(adjoint(e11) - e11));
        worst = std::max(worst, fro_norm(mul(e11, e11) - e11));
        for (int s = 0; s < nb; ++s) {
            diag_sum = diag_sum + unit(b, s, s);
            const Mat& v = unit(b, 0, s);
            worst = std::max(worst, fro_norm(mul(v, adjoint(v)) - e11));
            worst = std::max(worst, fro_norm(mul(adjoint(v), v) - unit(b, s, s)));
            worst = std::max(worst, fro_norm(adjoint(unit(b, s, 0)) - v));
            worst = std::max(worst, fro_norm(mul(e11, v) - v));
            for (int t = s + 1; t < nb; ++t)
                worst = std::max(worst, fro_norm(mul(v, adjoint(unit(b, 0, t)))));
        }
    }
    worst = std::max(worst, fro_norm(diag_sum - Mat::identity(ambient_dim)));
    return worst;
}

void MatrixUnitSystem::require_contract_exact(const char* who) const {
    const double d = generator_defect();
    if (d > contract_tol(ambient_dim))
        fail(ErrorCode::DeltaTooLarge,
             std::string(who) + ": matrix-unit relations violated (defect " + std::to_string(d) +
                 ")");
}

// --- BlockArray ----------------------------------------------------------

BlockArray BlockArray::empty(int m, int vars, int entry_dim) {
    if (m <= 0 || vars <= 0 || entry_dim <= 0)
        fail(ErrorCode::InvalidInput, "BlockArray: nonpositive shape");
    BlockArray b;
    b.m = m;
    b.vars = vars;
    b.entry_dim = entry_dim;
    b.entries.assign(static_cast<size_t>(m) * m * vars, Mat::zeros(entry_dim));
    return b;
}

Mat& BlockArray::at(int i, int j, int l) {
    return entries[(static_cast<size_t>(i) * m + j) * vars + l];
}

const Mat& BlockArray::at(int i, int j, int l) const {
    return entries[(static_cast<size_t>(i) * m + j) * vars + l];
}

// --- elementary correctors ----------------------------------------------

Mat correct_projection(const Mat& a) {
    a.require_finite("correct_projection");
    const Mat h = hermitian_part(a);
    EigH e = herm_eig(h);
    std::vector<double> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) {
        const double t = e.values[i];
        if (t >= 1.0 / 3.0 && t <= 2.0 / 3.0)
            fail(ErrorCode::SpectralGap,
                 "correct_projection: eigenvalue " + std::to_string(t) +
                     " inside the retraction gap [1/3, 2/3]");
        mapped[i] = t < 1.0 / 3.0 ? 0.0 : 1.0;
    }
    return assemble_from_eig(e, mapped);
}

Mat correct_unitary(const Mat& a) {
    a.require_finite("correct_unitary");
    Svd s = svd(a);
    const double smax = s.sigma.front();
    const double smin = s.sigma.back();
    if (smin <= 1e-12 * std::max(1.0, smax))
        fail(ErrorCode::RankDeficient,
             "correct_unitary: smallest singular value " + std::to_string(smin));
    return mul(s.u, s.vh);
}

Mat correct_partial_isometry(const Mat& p, const Mat& q, const Mat& a) {
    require_same_dim(p, a, "correct_partial_isometry");
    require_same_dim(q, a, "correct_partial_isometry");
    require_contract_projection(p, "correct_partial_isometry (source)");
    require_contract_projection(q, "correct_partial_isometry (range)");
    const int rp = projection_rank(p);
    const int rq = projection_rank(q);
    if (rp != rq)
        fail(ErrorCode::RankMismatch, "correct_partial_isometry: rank(P) = " + std::to_string(rp) +
                                          " vs rank(Q) = " + std::to_string(rq));
    const int n = a.dim();
    const Mat b = mul(mul(q, a), p);
    const Mat x = mul(b, adjoint(b)); // Q A P A* Q
    EigH e = herm_eig(x);
    // The top rank(Q) eigenvalues are the spectrum of the compression on
    // the range of Q (X is supported there).
    for (int i = n - rq; i < n; ++i) {
        const double t = e.values[static_cast<size_t>(i)];
        if (t > 0.25 && t < 0.75)
            fail(ErrorCode::SpectralGap,
                 "correct_partial_isometry: compression eigenvalue " + std::to_string(t) +
                     " inside (1/4, 3/4); input defect exceeds the admissible delta");
    }
    const ScalarFn f = scalar_fns::isometry_normalizer();
    std::vector<double> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) mapped[i] = f(e.values[i]);
    const Mat v = mul(assemble_from_eig(e, mapped), b);
    const double d_src = op_norm(mul(adjoint(v), v) - p);
    const double d_rng = op_norm(mul(v, adjoint(v)) - q);
    if (d_src > contract_tol(n) || d_rng > contract_tol(n))
        fail(ErrorCode::DeltaTooLarge,
             "correct_partial_isometry: output misses the prescribed projections (defects " +
                 std::to_string(d_src) + ", " + std::to_string(d_rng) + ")");
    return v;
}

std::vector<Mat> correct_resolution(const std::vector<Mat>& as) {
    if (as.empty()) fail(ErrorCode::InvalidInput, "correct_resolution: empty family");
    const int n = as[0].dim();
    for (const Mat& a : as) require_same_dim(as[0], a, "correct_resolution");
    std::vector<Mat> rounded;
    rounded.reserve(as.size());
    for (size_t j = 0; j < as.size(); ++j) {
        try {
            rounded.push_back(correct_projection(as[j]));
        } catch (const Error& err) {
            fail(err.code(), "correct_resolution: entry " + std::to_string(j) + ": " + err.what());
        }
    }
    Mat s = Mat::zeros(n);
    for (const Mat& pj : rounded) s = s + pj;
    EigH es = herm_eig(s);
    if (es.values.front() < 0.25 || es.values.back() > 1.75)
        fail(ErrorCode::GapError,
             "correct_resolution: Gram perturbation spectrum [" +
                 std::to_string(es.values.front()) + ", " + std::to_string(es.values.back()) +
                 "] too far from 1");
    std::vector<double> inv_sqrt(es.values.size());
    for (size_t i = 0; i < es.values.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(es.values[i]);
    const Mat r = assemble_from_eig(es, inv_sqrt);

    // Symmetrized family sums to 1 exactly; the sweep below restores exact
    // idempotence while preserving the sum.
    std::vector<Mat> sym;
    sym.reserve(rounded.size());
    for (const Mat& pj : rounded) sym.push_back(mul(mul(r, pj), r));

    std::vector<Mat> out(sym.size(), Mat::zeros(n));
    Mat used = Mat::zeros(n);
    for (size_t j = 0; j + 1 < sym.size(); ++j) {
        const Mat comp = Mat::identity(n) - used;
        const Mat t = mul(mul(comp, sym[j]), comp);
        try {
            out[j] = correct_projection(t);
        } catch (const Error& err) {
            fail(ErrorCode::GapError,
                 "correct_resolution: entry " + std::to_string(j) +
                     " lost its spectral gap during re-rounding: " + err.what());
        }
        used = used + out[j];
    }
    out.back() = Mat::identity(n) - used;
    const double tail_defect = projection_defect(out.back());
    if (tail_defect > contract_tol(n))
        fail(ErrorCode::DeltaTooLarge,
             "correct_resolution: complement is not a projection (defect " +
                 std::to_string(tail_defect) + ")");
    for (size_t j = 0; j < out.size(); ++j) {
        if (projection_rank(out[j]) != projection_rank(rounded[j]))
            fail(ErrorCode::DeltaTooLarge,
                 "correct_resolution: entry " + std::to_string(j) + " changed rank");
    }
    return out;
}

MatrixUnitSystem correct_matrix_units(const MatrixUnitSystem& approx) {
    const int dim = approx.ambient_dim;
    std::vector<Mat> diag_candidates;
    for (size_t b = 0; b < approx.structure.size(); ++b)
        for (int s = 0; s < approx.structure[b]; ++s)
            diag_candidates.push_back(approx.unit(b, s, s));
    const std::vector<Mat> diags = correct_resolution(diag_candidates);

    MatrixUnitSystem out = MatrixUnitSystem::empty(approx.structure, dim);
    size_t flat = 0;
    std::vector<std::vector<Mat>> first_row(approx.structure.size());
    for (size_t b = 0; b < approx.structure.size(); ++b) {
        const int nb = approx.structure[b];
        first_row[b].resize(static_cast<size_t>(nb));
        first_row[b][0] = diags[flat]; // e_11 acts as its own first-row unit
        for (int j = 1; j < nb; ++j) {
            try {
                first_row[b][static_cast<size_t>(j)] = correct_partial_isometry(
                    diags[flat + static_cast<size_t>(j)], diags[flat], approx.unit(b, 0, j));
            } catch (const Error& err) {
                fail(err.code(), "correct_matrix_units: unit (" + std::to_string(b) + ", 0, " +
                                     std::to_string(j) + "): " + err.what());
            }
        }
        for (int s = 0; s < nb; ++s)
            for (int t = 0; t < nb; ++t) {
                if (s == 0 && t == 0)
                    out.unit(b, s, t) = diags[flat];
                else if (s == 0)
                    out.unit(b, s, t) = first_row[b][static_cast<size_t>(t)];
                else if (t == 0)
                    out.unit(b, s, t) = adjoint(first_row[b][static_cast<size_t>(s)]);
                else
                    out.unit(b, s, t) = mul(adjoint(first_row[b][static_cast<size_t>(s)]),
                                            first_row[b][static_cast<size_t>(t)]);
            }
        flat += static_cast<size_t>(nb);
    }
    out.require_contract_exact("correct_matrix_units");
    return out;
}

std::pair<std::vector<Mat>, Mat> correct_tensor(const std::vector<Mat>& ts, const Mat& s, int n) {
    const int dim = s.dim();
    if (n < 2) fail(ErrorCode::InvalidParameter, "correct_tensor: block size must be at least 2");
    if (dim % n != 0)
        fail(ErrorCode::ShapeMismatch, "correct_tensor: ambient dim " + std::to_string(dim) +
                                           " not divisible by " + std::to_string(n));
    for (const Mat& t : ts) require_same_dim(s, t, "correct_tensor");

    // Shift convention: e_11 = 1 - S*S, e_1j = e_11 S^{j-1}.
    const Mat q = Mat::identity(dim) - mul(adjoint(s), s);
    MatrixUnitSystem cand = MatrixUnitSystem::empty({n}, dim);
    Mat power = Mat::identity(dim);
    std::vector<Mat> row(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        row[static_cast<size_t>(j)] = mul(q, power);
        if (j + 1 < n) power = mul(power, s);
    }
    for (int j = 0; j < n; ++j) {
        cand.unit(0, 0, j) = row[static_cast<size_t>(j)];
        cand.unit(0, j, 0) = adjoint(row[static_cast<size_t>(j)]);
        cand.unit(0, j, j) = mul(adjoint(row[static_cast<size_t>(j)]), row[static_cast<size_t>(j)]);
    }
    const MatrixUnitSystem units = correct_matrix_units(cand);

    Mat shift = Mat::zeros(dim);
    for (int j = 0; j + 1 < n; ++j) shift = shift + units.unit(0, j, j + 1);
    std::vector<Mat> compressed;
    compressed.reserve(ts.size());
    for (const Mat& t : ts) {
        Mat acc = Mat::zeros(dim);
        for (int j = 0; j < n; ++j)
            acc = acc + mul(mul(units.unit(0, j, 0), t), units.unit(0, 0, j));
        compressed.push_back(std::move(acc));
    }
    return {std::move(compressed), std::move(shift)};
}

DirectSumResult correct_direct_sum(const std::vector<Mat>& ss, const std::vector<Mat>& ts,
                                   const Mat& qc, const CorrectorFamily* corr_s,
                                   const CorrectorFamily* corr_t) {
    const int n = qc.dim();
    const Mat h = hermitian_part(qc);
    EigH e = herm_eig(h);
    std::vector<double> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) {
        const double t = e.values[i];
        if (t > 0.25 && t < 0.75)
            fail(ErrorCode::SpectralGap, "correct_direct_sum: central eigenvalue " +
                                             std::to_string(t) + " inside (1/4, 3/4)");
        mapped[i] = t <= 0.25 ? 0.0 : 1.0;
    }
    DirectSumResult out;
    out.central = assemble_from_eig(e, mapped);
    const Mat comp = Mat::identity(n) - out.central;
    const std::vector<Mat> ss_c = corr_s ? corr_s->corrector(ss) : ss;
    const std::vector<Mat> ts_c = corr_t ? corr_t->corrector(ts) : ts;
    for (const Mat& m : ss_c) out.s_blocks.push_back(mul(mul(out.central, m), out.central));
    for (const Mat& m : ts_c) out.t_blocks.push_back(mul(mul(comp, m), comp));
    return out;
}

std::vector<Mat> glue(const CorrectorFamily& corr_p, const CorrectorFamily& corr_q,
                      const std::vector<Mat>& vs) {
    const int n = static_cast<int>(vs.size());
    if (n == 0) fail(ErrorCode::InvalidInput, "glue: empty tuple");
    if (corr_p.relation.arity() != n || corr_q.relation.arity() != n)
        fail(ErrorCode::ShapeMismatch, "glue: corrector arities must match the tuple length");
    std::vector<Mat> sources, ranges;
    for (const Mat& v : vs) {
        sources.push_back(mul(adjoint(v), v));
        ranges.push_back(mul(v, adjoint(v)));
    }
    const double dp = op_norm(eval(corr_p.relation, sources));
    if (dp >= corr_p.admissible_defect)
        fail(ErrorCode::DeltaTooLarge, "glue: source-relation defect " + std::to_string(dp) +
                                           " is not below " +
                                           std::to_string(corr_p.admissible_defect));
    const double dq = op_norm(eval(corr_q.relation, ranges));
    if (dq >= corr_q.admissible_defect)
        fail(ErrorCode::DeltaTooLarge, "glue: range-relation defect " + std::to_string(dq) +
                                           " is not below " +
                                           std::to_string(corr_q.admissible_defect));
    const std::vector<Mat> ps = corr_p.corrector(sources);
    const std::vector<Mat> qs = corr_q.corrector(ranges);
    std::vector<Mat> out;
    out.reserve(vs.size());
    for (int i = 0; i < n; ++i) {
        try {
            out.push_back(correct_partial_isometry(ps[static_cast<size_t>(i)],
                                                   qs[static_cast<size_t>(i)],
                                                   vs[static_cast<size_t>(i)]));
        } catch (const Error& err) {
            fail(err.code(), "glue: index " + std::to_string(i) + ": " + err.what());
        }
    }
    return out;
}

namespace {

// Orthonormal basis columns of the eigenspace with eigenvalue above 1/2
// (range) or below (kernel) of a contract-exact projection.
std::vector<std::vector<cplx>> projection_basis(const Mat& p, bool range) {
    EigH e = herm_eig(p);
    std::vector<std::vector<cplx>> cols;
    const int n = p.dim();
    for (int k = 0; k < n; ++k) {
        const bool in_range = e.values[static_cast<size_t>(k)] > 0.5;
        if (in_range != range) continue;
        std::vector<cplx> col(static_cast<size_t>(n));
        for (int r = 0; r < n; ++r) col[static_cast<size_t>(r)] = e.vectors.at(r, k);
        cols.push_back(std::move(col));
    }
    return cols;
}

cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double vec_norm(const std::vector<cplx>& a) {
    double s = 0.0;
    for (const cplx& v : a) s += std::norm(v);
    return std::sqrt(s);
}

std::vector<cplx> apply_mat(const Mat& m, const std::vector<cplx>& v) {
    const int n = m.dim();
    std::vector<cplx> out(static_cast<size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < n; ++c) acc += m.at(r, c) * v[static_cast<size_t>(c)];
        out[static_cast<size_t>(r)] = acc;
    }
    return out;
}

void orthonormalize(std::vector<std::vector<cplx>>& vs) {
    for (size_t j = 0; j < vs.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (size_t k = 0; k < j; ++k) {
                const cplx c = dot(vs[k], vs[j]);
                for (size_t i = 0; i < vs[j].size(); ++i) vs[j][i] -= c * vs[k][i];
            }
        const double nrm = vec_norm(vs[j]);
        if (nrm < 1e-10) fail(ErrorCode::GapError, "orthonormalize: degenerate vector");
        for (cplx& v : vs[j]) v /= nrm;
    }
}

Mat rank_one_sum(int dim, const std::vector<std::vector<cplx>>& vs) {
    Mat out(dim);
    for (const auto& v : vs)
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) out.at(r, c) += v[static_cast<size_t>(r)] * std::conj(v[static_cast<size_t>(c)]);
    return out;
}

} // namespace

std::pair<Mat, Mat> correct_two_projections(const Mat& a1, const Mat& a2, double c) {
    if (!(c > 0.0 && c < 1.0))
        fail(ErrorCode::InvalidParameter, "correct_two_projections: c must lie in (0, 1)");
    require_same_dim(a1, a2, "correct_two_projections");
    const int n = a1.dim();
    const Mat p1 = correct_projection(a1);
    const Mat p2_round = correct_projection(a2);
    const int r2 = projection_rank(p2_round);

    const auto b1 = projection_basis(p1, true);
    const int r1 = static_cast<int>(b1.size());
    const double radius = std::min(c, 1.0 - c) / 4.0;

    // Compression of P2 to ran P1 in the b1 basis.
    Mat y(std::max(r1, 1));
    std::vector<std::vector<cplx>> p2b1;
    for (const auto& col : b1) p2b1.push_back(apply_mat(p2_round, col));
    for (int i = 0; i < r1; ++i)
        for (int j = 0; j < r1; ++j)
            y.at(i, j) = dot(b1[static_cast<size_t>(i)], p2b1[static_cast<size_t>(j)]);

    std::vector<std::vector<cplx>> generic_u, generic_w;
    if (r1 > 0) {
        EigH ey = herm_eig(y);
        for (int k = 0; k < r1; ++k) {
            const double mu = ey.values[static_cast<size_t>(k)];
            const bool near_zero = std::abs(mu) <= radius;
            const bool near_c = std::abs(mu - c) <= radius;
            if (!near_zero && !near_c)
                fail(ErrorCode::GapError,
                     "correct_two_projections: angle eigenvalue " + std::to_string(mu) +
                         " not clustered near {0, " + std::to_string(c) + "}");
            if (!near_c) continue;
            std::vector<cplx> u(static_cast<size_t>(n), 0.0);
            for (int i = 0; i < r1; ++i) {
                const cplx w = ey.vectors.at(i, k);
                for (int r = 0; r < n; ++r) u[static_cast<size_t>(r)] += w * b1[static_cast<size_t>(i)][static_cast<size_t>(r)];
            }
            // Component of P2 u outside ran P1.
            std::vector<cplx> w = apply_mat(p2_round, u);
            const std::vector<cplx> pu = apply_mat(p1, w);
            for (size_t i = 0; i < w.size(); ++i) w[i] -= pu[i];
            if (vec_norm(w) < 1e-8)
                fail(ErrorCode::GapError,
                     "correct_two_projections: generic direction collapsed onto ran P1");
            generic_u.push_back(std::move(u));
            generic_w.push_back(std::move(w));
        }
    }
    orthonormalize(generic_w);

    const int g = static_cast<int>(generic_u.size());
    const int k2 = r2 - g;
    if (k2 < 0)
        fail(ErrorCode::GapError, "correct_two_projections: generic part exceeds rank of P2");

    std::vector<std::vector<cplx>> extra;
    if (k2 > 0) {
        // Basis of ker P1 with the generic w-directions removed.
        auto b0 = projection_basis(p1, false);
        std::vector<std::vector<cplx>> rest;
        for (auto& col : b0) {
            for (const auto& w : generic_w) {
                const cplx pr = dot(w, col);
                for (size_t i = 0; i < col.size(); ++i) col[i] -= pr * w[i];
            }
            if (vec_norm(col) > 1e-6) rest.push_back(std::move(col));
        }
        orthonormalize(rest);
        const int m = static_cast<int>(rest.size());
        Mat z(std::max(m, 1));
        std::vector<std::vector<cplx>> p2rest;
        for (const auto& col : rest) p2rest.push_back(apply_mat(p2_round, col));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) z.at(i, j) = dot(rest[static_cast<size_t>(i)], p2rest[static_cast<size_t>(j)]);
        EigH ez = herm_eig(z);
        int found = 0;
        for (int k = m - 1; k >= 0 && found < k2; --k, ++found) {
            if (ez.values[static_cast<size_t>(k)] < 0.5)
                fail(ErrorCode::GapError,
                     "correct_two_projections: missing complement directions for rank of P2");
            std::vector<cplx> v(static_cast<size_t>(n), 0.0);
            for (int i = 0; i < m; ++i) {
                const cplx w = ez.vectors.at(i, k);
                for (int r = 0; r < n; ++r) v[static_cast<size_t>(r)] += w * rest[static_cast<size_t>(i)][static_cast<size_t>(r)];
            }
            extra.push_back(std::move(v));
        }
        if (found < k2)
            fail(ErrorCode::GapError,
                 "correct_two_projections: missing complement directions for rank of P2");
        orthonormalize(extra);
    }

    Mat p2(n);
    const double off = std::sqrt(c * (1.0 - c));
    for (int idx = 0; idx < g; ++idx) {
        const auto& u = generic_u[static_cast<size_t>(idx)];
        const auto& w = generic_w[static_cast<size_t>(idx)];
        for (int r = 0; r < n; ++r)
            for (int cc = 0; cc < n; ++cc) {
                const cplx uu = u[static_cast<size_t>(r)] * std::conj(u[static_cast<size_t>(cc)]);
                const cplx ww = w[static_cast<size_t>(r)] * std::conj(w[static_cast<size_t>(cc)]);
                const cplx uw = u[static_cast<size_t>(r)] * std::conj(w[static_cast<size_t>(cc)]);
                const cplx wu = w[static_cast<size_t>(r)] * std::conj(u[static_cast<size_t>(cc)]);
                p2.at(r, cc) += c * uu + off * (uw + wu) + (1.0 - c) * ww;
            }
    }
    p2 = p2 + rank_one_sum(n, extra);
    return {p1, p2};
}

Mat assemble_blocks(const BlockArray& in, int l) {
    Mat big(in.m * in.entry_dim);
    for (int i = 0; i < in.m; ++i)
        for (int j = 0; j < in.m; ++j)
            paste_block(big, in.at(i, j, l), i * in.entry_dim, j * in.entry_dim);
    return big;
}

BlockArray extract_blocks(const std::vector<Mat>& assembled, int m, int entry_dim) {
    BlockArray out = BlockArray::empty(m, static_cast<int>(assembled.size()), entry_dim);
    for (int l = 0; l < out.vars; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                out.at(i, j, l) =
                    extract_block(assembled[static_cast<size_t>(l)], i * entry_dim, j * entry_dim, entry_dim);
    return out;
}

BlockArray correct_blockwise(const BlockArray& in, const CorrectorFamily& base) {
    std::vector<Mat> assembled;
    assembled.reserve(static_cast<size_t>(in.vars));
    for (int l = 0; l < in.vars; ++l) assembled.push_back(assemble_blocks(in, l));
    const std::vector<Mat> corrected = base.corrector(assembled);
    if (corrected.size() != assembled.size())
        fail(ErrorCode::ShapeMismatch, "correct_blockwise: base corrector changed the tuple size");
    return extract_blocks(corrected, in.m, in.entry_dim);
}

// --- joint approximate diagonalization ----------------------------------

namespace {

double off_diag_mass(const std::vector<Mat>& as) {
    double mass = 0.0;
    for (const Mat& a : as) {
        const int n = a.dim();
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (r != c) mass += std::norm(a.at(r, c));
    }
    return mass;
}

// Dominant eigenvector of a symmetric 3x3 matrix via cyclic Jacobi.
void dominant_eigvec3(double g[3][3], double v[3]) {
    double q[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(g[0][1]) + std::abs(g[0][2]) + std::abs(g[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p)
            for (int qq = p + 1; qq < 3; ++qq) {
                if (std::abs(g[p][qq]) < 1e-30) continue;
                const double theta = 0.5 * std::atan2(2.0 * g[p][qq], g[p][p] - g[qq][qq]);
                const double cs = std::cos(theta), sn = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    const double gp = g[p][k], gq = g[qq][k];
                    g[p][k] = cs * gp + sn * gq;
                    g[qq][k] = -sn * gp + cs * gq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double gp = g[k][p], gq = g[k][qq];
                    g[k][p] = cs * gp + sn * gq;
                    g[k][qq] = -sn * gp + cs * gq;
                    const double qp = q[k][p], qn = q[k][qq];
                    q[k][p] = cs * qp + sn * qn;
                    q[k][qq] = -sn * qp + cs * qn;
                }
            }
    }
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (g[k][k] > g[best][best]) best = k;
    for (int k = 0; k < 3; ++k) v[k] = q[k][best];
}

} // namespace

CommutingNormalsResult correct_commuting_normals(const std::vector<Mat>& as, double p,
                                                 const BlockAlgebra* alg) {
    if (as.empty()) fail(ErrorCode::InvalidInput, "correct_commuting_normals: empty family");
    const int n = as[0].dim();
    for (const Mat& a : as) {
        require_same_dim(as[0], a, "correct_commuting_normals");
        a.require_finite("correct_commuting_normals");
    }

    std::vector<Mat> work = as;
    Mat w = Mat::identity(n);
    const double tol = 1e-12 * n;
    const int max_sweeps = 200;

    CommutingNormalsResult res;
    res.off_mass = off_diag_mass(work);
    int sweep = 0;
    for (; sweep < max_sweeps && res.off_mass > tol; ++sweep) {
        bool rotated = false;
        for (int pi = 0; pi < n - 1; ++pi)
            for (int qi = pi + 1; qi < n; ++qi) {
                // Givens angles minimizing the pivot's contribution to the
                // summed squared off-diagonal moduli over all matrices.
                double g[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
                for (const Mat& a : work) {
                    const cplx h0 = a.at(pi, pi) - a.at(qi, qi);
                    const cplx h1 = a.at(pi, qi) + a.at(qi, pi);
                    const cplx h2 = cplx(0, 1) * (a.at(qi, pi) - a.at(pi, qi));
                    const cplx h[3] = {h0, h1, h2};
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) g[i][j] += (std::conj(h[i]) * h[j]).real();
                }
                double v[3];
                dominant_eigvec3(g, v);
                if (v[0] < 0.0) {
                    v[0] = -v[0];
                    v[1] = -v[1];
                    v[2] = -v[2];
                }
                const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
                if (r < 1e-30) continue;
                const double cs = std::sqrt((v[0] + r) / (2.0 * r));
                const cplx sn = cplx(v[1], -v[2]) / std::sqrt(2.0 * r * (v[0] + r));
                if (std::abs(sn) < 1e-15) continue;
                rotated = true;
                // A <- J* A J with J = [[c, conj(s)], [-s, c]] on (pi, qi).
                for (Mat& a : work) {
                    for (int k = 0; k < n; ++k) { // row update: rows pi, qi of J* A
                        const cplx ap = a.at(pi, k), aq = a.at(qi, k);
                        a.at(pi, k) = cs * ap - std::conj(sn) * aq;
                        a.at(qi, k) = sn * ap + cs * aq;
                    }
                    for (int k = 0; k < n; ++k) { // column update: A J
                        const cplx ap = a.at(k, pi), aq = a.at(k, qi);
                        a.at(k, pi) = cs * ap - sn * aq;
                        a.at(k, qi) = std::conj(sn) * ap + cs * aq;
                    }
                }
                for (int k = 0; k < n; ++k) {
                    const cplx wp = w.at(k, pi), wq = w.at(k, qi);
                    w.at(k, pi) = cs * wp - sn * wq;
                    w.at(k, qi) = std::conj(sn) * wp + cs * wq;
                }
            }
        res.off_mass = off_diag_mass(work);
        if (!rotated) break;
    }
    res.sweeps = sweep;
    res.converged = res.off_mass <= tol;

    res.bs.reserve(as.size());
    const BlockAlgebra full = BlockAlgebra::full(n);
    const BlockAlgebra& norm_alg = alg ? *alg : full;
    for (size_t j = 0; j < as.size(); ++j) {
        std::vector<cplx> d(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = work[j].at(i, i);
        // B = W diag W*.
        Mat b(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                cplx acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += w.at(r, k) * d[static_cast<size_t>(k)] * std::conj(w.at(c, k));
                b.at(r, c) = acc;
            }
        res.sum_p_distance += norm_alg.p_norm(as[j] - b, p);
        res.bs.push_back(std::move(b));
    }
    return res;
}

// --- single generator ----------------------------------------------------

cplx TabulatedFn::operator()(double t) const {
    size_t best = 0;
    double bd = std::abs(t - points[0]);
    for (size_t i = 1; i < points.size(); ++i) {
        const double d = std::abs(t - points[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return values[best];
}

Mat TabulatedFn::apply(const Mat& c) const {
    EigH e = herm_eig(c);
    std::vector<cplx> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) mapped[i] = (*this)(e.values[i]);
    return assemble_from_eig_cplx(e, mapped);
}

SingleGeneratorResult single_generator(const std::vector<Mat>& bs) {
    if (bs.empty()) fail(ErrorCode::InvalidInput, "single_generator: empty family");
    const int n = bs[0].dim();
    const double tol = contract_tol(n);
    for (size_t j = 0; j < bs.size(); ++j) {
        require_same_dim(bs[0], bs[j], "single_generator");
        const double nd = op_norm(commutator(bs[j], adjoint(bs[j])));
        if (nd > tol)
            fail(ErrorCode::CommutationError,
                 "single_generator: input " + std::to_string(j) + " is not normal (defect " +
                     std::to_string(nd) + ")");
        for (size_t k = j + 1; k < bs.size(); ++k) {
            const double cd = op_norm(commutator(bs[j], bs[k]));
            if (cd > tol)
                fail(ErrorCode::CommutationError,
                     "single_generator: inputs " + std::to_string(j) + ", " + std::to_string(k) +
                         " do not commute (defect " + std::to_string(cd) + ")");
        }
    }

    // Columns of `basis` refine into joint eigenspaces: split repeatedly by
    // the Hermitian and anti-Hermitian parts of each input.
    Mat basis = Mat::identity(n);
    std::vector<std::pair<int, int>> blocks = {{0, n}}; // [begin, end)
    const double cluster = 1e-7;

    auto split_by = [&](const Mat& h) {
        std::vector<std::pair<int, int>> next;
        for (const auto& [b0, b1] : blocks) {
            const int m = b1 - b0;
            if (m == 1) {
                next.emplace_back(b0, b1);
                continue;
            }
            // Compress h to the block's basis columns.
            Mat hb(m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    cplx acc = 0.0;
                    for (int r = 0; r < n; ++r)
                        for (int c = 0; c < n; ++c)
                            acc += std::conj(basis.at(r, b0 + i)) * h.at(r, c) * basis.at(c, b0 + j);
                    hb.at(i, j) = acc;
                }
            EigH eh = herm_eig(hb);
            // Rotate the block columns by the eigenvector matrix.
            Mat rotated(n);
            for (int r = 0; r < n; ++r)
                for (int j = 0; j < m; ++j) {
                    cplx acc = 0.0;
                    for (int i = 0; i < m; ++i) acc += basis.at(r, b0 + i) * eh.vectors.at(i, j);
                    rotated.at(r, j) = acc;
                }
            for (int r = 0; r < n; ++r)
                for (int j = 0; j < m; ++j) basis.at(r, b0 + j) = rotated.at(r, j);
            int start = 0;
            for (int j = 1; j <= m; ++j) {
                if (j == m || eh.values[static_cast<size_t>(j)] - eh.values[static_cast<size_t>(j - 1)] > cluster) {
                    next.emplace_back(b0 + start, b0 + j);
                    start = j;
                }
            }
        }
        blocks = std::move(next);
    };

    for (const Mat& b : bs) {
        split_by(hermitian_part(b));
        split_by(hermitian_part(cplx(0, -1) * b));
    }

    SingleGeneratorResult out;
    const int m = static_cast<int>(blocks.size());
    std::vector<double> cvals(static_cast<size_t>(n));
    for (int bi = 0; bi < m; ++bi)
        for (int k = blocks[static_cast<size_t>(bi)].first; k < blocks[static_cast<size_t>(bi)].second; ++k)
            cvals[static_cast<size_t>(k)] = bi + 1;
    EigH fake;
    fake.vectors = basis;
    out.generator = assemble_from_eig(fake, cvals);

    for (const Mat& b : bs) {
        TabulatedFn fn;
        for (int bi = 0; bi < m; ++bi) {
            const auto& [b0, b1] = blocks[static_cast<size_t>(bi)];
            cplx acc = 0.0;
            for (int k = b0; k < b1; ++k) {
                cplx diag = 0.0;
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c)
                        diag += std::conj(basis.at(r, k)) * b.at(r, c) * basis.at(c, k);
                acc += diag;
            }
            fn.points.push_back(bi + 1);
            fn.values.push_back(acc / static_cast<double>(b1 - b0));
        }
        out.fns.push_back(std::move(fn));
    }
    return out;
}

// --- finite Haar analogue -------------------------------------------------

namespace {

double wrap_angle(double t) {
    while (t <= -M_PI) t += 2.0 * M_PI;
    while (t > M_PI) t -= 2.0 * M_PI;
    return t;
}

} // namespace

Mat correct_haar(const Mat& u, const BlockAlgebra& alg) {
    alg.require_compatible(u, "correct_haar");
    const int n = u.dim();
    const Mat u0 = correct_unitary(u);
    EigNormal e = normal_eig(u0);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> phase(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) phase[static_cast<size_t>(i)] = std::arg(e.values[static_cast<size_t>(i)]);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return phase[static_cast<size_t>(a)] < phase[static_cast<size_t>(b)]; });

    // Fit theta* so the sorted phases sit nearest to theta* + 2 pi j / n:
    // circular mean of the residuals.
    std::vector<double> resid(static_cast<size_t>(n));
    cplx mean = 0.0;
    for (int j = 0; j < n; ++j) {
        resid[static_cast<size_t>(j)] =
            phase[static_cast<size_t>(order[static_cast<size_t>(j)])] - 2.0 * M_PI * j / n;
        mean += std::exp(cplx(0, resid[static_cast<size_t>(j)]));
    }
    const double hint = std::arg(mean);
    double theta = 0.0;
    for (int j = 0; j < n; ++j) theta += wrap_angle(resid[static_cast<size_t>(j)] - hint);
    theta = hint + theta / n;

    std::vector<cplx> snapped(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        snapped[static_cast<size_t>(order[static_cast<size_t>(j)])] =
            std::exp(cplx(0, theta + 2.0 * M_PI * j / n));

    Mat v(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += e.vectors.at(r, k) * snapped[static_cast<size_t>(k)] * std::conj(e.vectors.at(c, k));
            v.at(r, c) = acc;
        }
    return v;
}

// --- registered families ---------------------------------------------------

CorrectorFamily family_projections(int n) {
    CorrectorFamily f;
    f.name = "projections";
    f.relation = rel_projections(n);
    f.fixed_point = true;
    f.admissible_defect = 1.0 / 9.0;
    f.corrector = [](const std::vector<Mat>& xs) {
        std::vector<Mat> out;
        out.reserve(xs.size());
        for (const Mat& x : xs) out.push_back(correct_projection(x));
        return out;
    };
    return f;
}

CorrectorFamily family_resolution(int n) {
    CorrectorFamily f;
    f.name = "resolution";
    f.relation = rel_resolution(n);
    f.fixed_point = true;
    f.admissible_defect = 0.1;
    f.corrector = [](const std::vector<Mat>& xs) { return correct_resolution(xs); };
    return f;
}

CorrectorFamily family_two_projections(double c) {
    CorrectorFamily f;
    f.name = "two_projections";
    f.relation = rel_two_projections(c);
    f.fixed_point = true;
    f.admissible_defect = 0.1;
    f.corrector = [c](const std::vector<Mat>& xs) {
        if (xs.size() != 2)
            fail(ErrorCode::ShapeMismatch, "two_projections corrector expects a pair");
        auto [p1, p2] = correct_two_projections(xs[0], xs[1], c);
        return std::vector<Mat>{p1, p2};
    };
    return f;
}

CorrectorFamily family_orthogonal_pair() {
    CorrectorFamily f;
    f.name = "orthogonal_pair";
    const NcExpr x = NcExpr::var(0), y = NcExpr::var(1);
    f.relation = rel_projections(2) + (x * y).adj() * (x * y);
    f.fixed_point = true;
    f.admissible_defect = 0.1;
    f.corrector = [](const std::vector<Mat>& xs) {
        if (xs.size() != 2)
            fail(ErrorCode::ShapeMismatch, "orthogonal_pair corrector expects a pair");
        const Mat p = correct_projection(xs[0]);
        const Mat comp = Mat::identity(p.dim()) - p;
        const Mat q = correct_projection(mul(mul(comp, xs[1]), comp));
        return std::vector<Mat>{p, q};
    };
    return f;
}

std::optional<CorrectorFamily> family_by_name(const std::string& name, int n, double c) {
    if (name == "projections") return family_projections(n);
    if (name == "resolution") return family_resolution(n);
    if (name == "two_projections") return family_two_projections(c);
    if (name == "orthogonal_pair") return family_orthogonal_pair();
    return std::nullopt;
}

} // namespace liftkit
