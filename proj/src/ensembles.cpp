#include "liftkit/ensembles.hpp"

#include <cmath>

#include "liftkit/block_algebra.hpp"
#include "liftkit/rng.hpp"
#include "liftkit/spectral.hpp"

namespace liftkit {

namespace {

struct Residual {
    std::string label;
    Mat value;
};

// Packages residual matrices into the measured-defect report.
void finish(GeneratedInstance& inst, const std::string& kind,
            const std::vector<Residual>& residuals) {
    const BlockAlgebra alg = BlockAlgebra::full(residuals.empty() ? 1 : residuals[0].value.dim());
    double worst_op = 0.0, worst_2 = 0.0;
    inst.report.relation_id = kind + "/measured";
    for (const Residual& r : residuals) {
        DefectReport::Summand s;
        s.op_defect = op_norm(r.value);
        s.p_defects[2.0] = alg.norm2(r.value);
        worst_op = std::max(worst_op, s.op_defect);
        worst_2 = std::max(worst_2, s.p_defects[2.0]);
        inst.report.summands.push_back(std::move(s));
    }
    inst.report.op_defect = worst_op;
    inst.report.p_defects[2.0] = worst_2;
    inst.measured_defect = worst_op;
}

Mat normalized_hermitian(Rng& rng, int dim) {
    Mat h = random_hermitian(rng, dim);
    const double nrm = op_norm(h);
    return (1.0 / nrm) * h;
}

Mat normalized_ginibre(Rng& rng, int dim) {
    Mat g = random_ginibre(rng, dim);
    const double nrm = op_norm(g);
    return (1.0 / nrm) * g;
}

// Rescales s until measure(build(s)) lands in [delta/2, 2*delta].
template <typename Build, typename Measure>
double calibrate(double delta, Build&& build, Measure&& measure, GeneratedInstance& out) {
    double s = delta;
    for (int attempt = 0; attempt < 20; ++attempt) {
        out = build(s);
        const double m = measure(out);
        if (m >= 0.5 * delta && m <= 2.0 * delta) return m;
        s = (m > 0.0) ? s * (delta / m) : s * 2.0;
    }
    fail(ErrorCode::CalibrationError,
         "ensemble calibration failed to reach defect " + std::to_string(delta));
}

} // namespace

bool is_perturbative_kind(const std::string& kind) {
    return kind == "near_projection" || kind == "near_unitary" ||
           kind == "near_partial_isometry" || kind == "near_matrix_units" ||
           kind == "almost_commuting_pair" || kind == "near_resolution";
}

GeneratedInstance generate(const EnsembleSpec& spec) {
    if (spec.dim < 2) fail(ErrorCode::InvalidParameter, "generate: dim must be at least 2");
    if (is_perturbative_kind(spec.kind)) {
        if (spec.delta < 0.0 || spec.delta > 0.2)
            fail(ErrorCode::InvalidParameter,
                 "generate: delta must lie in [0, 0.2] for perturbative kinds");
    }
    Rng rng(spec.seed);
    const int n = spec.dim;
    GeneratedInstance inst;

    if (spec.kind == "near_projection") {
        const int rank = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - 1)));
        const Mat p0 = random_projection(rng, n, rank);
        const Mat h = normalized_hermitian(rng, n);
        auto build = [&](double s) {
            GeneratedInstance g;
            g.mats = {p0 + cplx(s) * h};
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            const Mat& a = g.mats[0];
            finish(g, spec.kind,
                   {{"skew", a - adjoint(a)}, {"idempotency", a - mul(a, a)}});
            return g.measured_defect;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    if (spec.kind == "near_unitary") {
        const Mat u0 = random_haar_unitary(rng, n);
        const Mat h = normalized_hermitian(rng, n);
        auto build = [&](double s) {
            GeneratedInstance g;
            g.mats = {mul(u0, Mat::identity(n) + cplx(s) * h)};
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            const Mat& a = g.mats[0];
            finish(g, spec.kind, {{"gram", mul(adjoint(a), a) - Mat::identity(n)}});
            return g.measured_defect;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    if (spec.kind == "near_partial_isometry") {
        const int rank = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - 1)));
        const Mat u1 = random_haar_unitary(rng, n);
        const Mat u2 = random_haar_unitary(rng, n);
        Mat p0(n), q0(n), v0(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                cplx ap = 0.0, aq = 0.0, av = 0.0;
                for (int k = 0; k < rank; ++k) {
                    ap += u1.at(r, k) * std::conj(u1.at(c, k));
                    aq += u2.at(r, k) * std::conj(u2.at(c, k));
                    av += u2.at(r, k) * std::conj(u1.at(c, k));
                }
                p0.at(r, c) = ap;
                q0.at(r, c) = aq;
                v0.at(r, c) = av;
            }
        const Mat g0 = normalized_ginibre(rng, n);
        const Mat compressed = mul(mul(q0, g0), p0);
        auto build = [&](double s) {
            GeneratedInstance g;
            g.mats = {p0, q0, v0 + cplx(s) * compressed};
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            const Mat& a = g.mats[2];
            finish(g, spec.kind,
                   {{"source", mul(adjoint(a), a) - p0}, {"range", mul(a, adjoint(a)) - q0}});
            return g.measured_defect;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    if (spec.kind == "near_matrix_units") {
        if (n % 2 != 0)
            fail(ErrorCode::InvalidParameter, "near_matrix_units: dim must be even");
        const int m = n / 2;
        const Mat w = random_haar_unitary(rng, n);
        MatrixUnitSystem exact = MatrixUnitSystem::empty({2}, n);
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t) {
                Mat unit(n);
                for (int k = 0; k < m; ++k) unit.at(s * m + k, t * m + k) = 1.0;
                exact.unit(0, s, t) = mul(mul(w, unit), adjoint(w));
            }
        const Mat h = normalized_hermitian(rng, n);
        EigH eh = herm_eig(h);
        auto build = [&](double s) {
            std::vector<double> forward(eh.values.size()), backward(eh.values.size());
            for (size_t k = 0; k < eh.values.size(); ++k) {
                forward[k] = 1.0 + s * eh.values[k];
                backward[k] = 1.0 / forward[k];
            }
            const Mat t = assemble_from_eig(eh, forward);
            const Mat tinv = assemble_from_eig(eh, backward);
            GeneratedInstance g;
            g.units = MatrixUnitSystem::empty({2}, n);
            for (int ss = 0; ss < 2; ++ss)
                for (int tt = 0; tt < 2; ++tt) {
                    g.units->unit(0, ss, tt) = mul(mul(t, exact.unit(0, ss, tt)), tinv);
                    g.mats.push_back(g.units->unit(0, ss, tt));
                }
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            const double d = g.units->generator_defect();
            g.report = DefectReport{};
            g.report.relation_id = spec.kind + "/measured";
            g.report.op_defect = d;
            g.measured_defect = d;
            return d;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    if (spec.kind == "almost_commuting_pair") {
        std::vector<cplx> d1(static_cast<size_t>(n)), d2(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double r1 = std::sqrt(rng.next_double()), a1 = 2.0 * M_PI * rng.next_double();
            const double r2 = std::sqrt(rng.next_double()), a2 = 2.0 * M_PI * rng.next_double();
            d1[static_cast<size_t>(k)] = r1 * std::exp(cplx(0, a1));
            d2[static_cast<size_t>(k)] = r2 * std::exp(cplx(0, a2));
        }
        const Mat w = random_haar_unitary(rng, n);
        const Mat n1 = mul(mul(w, Mat::diag(d1)), adjoint(w));
        const Mat n2 = mul(mul(w, Mat::diag(d2)), adjoint(w));
        const Mat g1 = normalized_ginibre(rng, n);
        const Mat g2 = normalized_ginibre(rng, n);
        auto build = [&](double s) {
            GeneratedInstance g;
            g.mats = {n1 + cplx(s) * g1, n2 + cplx(s) * g2};
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            const Mat& a = g.mats[0];
            const Mat& b = g.mats[1];
            finish(g, spec.kind,
                   {{"commutator", commutator(a, b)},
                    {"normality_1", commutator(a, adjoint(a))},
                    {"normality_2", commutator(b, adjoint(b))}});
            return g.measured_defect;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    if (spec.kind == "clock_shift") {
        Mat u(n), v(n);
        for (int k = 0; k < n; ++k) {
            u.at(k, k) = std::exp(cplx(0, 2.0 * M_PI * k / n));
            v.at((k + 1) % n, k) = 1.0;
        }
        inst.mats = {u, v};
        finish(inst, spec.kind, {{"commutator", commutator(u, v)}});
        return inst;
    }

    if (spec.kind == "haar_unitary") {
        inst.mats = {random_haar_unitary(rng, n)};
        finish(inst, spec.kind,
               {{"gram", mul(adjoint(inst.mats[0]), inst.mats[0]) - Mat::identity(n)}});
        return inst;
    }

    if (spec.kind == "near_resolution") {
        const int parts = n < 6 ? 2 : 3;
        const Mat u = random_haar_unitary(rng, n);
        std::vector<Mat> exact;
        int start = 0;
        for (int j = 0; j < parts; ++j) {
            const int size = (j + 1 == parts) ? n - start : n / parts;
            Mat p(n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    cplx acc = 0.0;
                    for (int k = start; k < start + size; ++k)
                        acc += u.at(r, k) * std::conj(u.at(c, k));
                    p.at(r, c) = acc;
                }
            exact.push_back(std::move(p));
            start += size;
        }
        std::vector<Mat> hs;
        for (int j = 0; j < parts; ++j) hs.push_back(normalized_hermitian(rng, n));
        auto build = [&](double s) {
            GeneratedInstance g;
            for (int j = 0; j < parts; ++j)
                g.mats.push_back(exact[static_cast<size_t>(j)] + cplx(s) * hs[static_cast<size_t>(j)]);
            return g;
        };
        auto measure = [&](GeneratedInstance& g) {
            std::vector<Residual> rs;
            Mat sum = Mat::zeros(n);
            for (size_t j = 0; j < g.mats.size(); ++j) {
                rs.push_back({"idempotency_" + std::to_string(j),
                              g.mats[j] - mul(g.mats[j], g.mats[j])});
                sum = sum + g.mats[j];
            }
            rs.push_back({"sum", sum - Mat::identity(n)});
            finish(g, spec.kind, rs);
            return g.measured_defect;
        };
        if (spec.delta == 0.0) {
            inst = build(0.0);
            measure(inst);
        } else {
            calibrate(spec.delta, build, measure, inst);
        }
        return inst;
    }

    fail(ErrorCode::InvalidParameter, "generate: unknown ensemble kind '" + spec.kind + "'");
}

} // namespace liftkit
