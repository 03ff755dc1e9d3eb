#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>

#include "liftkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <lapacke.h>

namespace liftkit {

namespace {

[[noreturn]] void lapack_fail(const char* routine, int info) {
    fail(ErrorCode::LapackError,
         std::string(routine) + " failed with info " + std::to_string(info));
}

} // namespace

EigH herm_eig(const Mat& a) {
    a.require_finite("herm_eig");
    const int n = a.dim();
    const double skew = op_norm(a - adjoint(a));
    if (skew > hermitian_tol(n))
        fail(ErrorCode::SymmetryError,
             "herm_eig: input deviates from Hermitian by " + std::to_string(skew));
    Mat h = hermitian_part(a);
    EigH out;
    out.values.resize(static_cast<size_t>(n));
    const int info = LAPACKE_zheev(LAPACK_ROW_MAJOR, 'V', 'U', n, h.data().data(), n,
                                   out.values.data());
    if (info != 0) lapack_fail("zheev", info);
    out.vectors = std::move(h);
    return out;
}

Svd svd(const Mat& a) {
    a.require_finite("svd");
    const int n = a.dim();
    Mat work = a;
    Svd out;
    out.u = Mat(n);
    out.vh = Mat(n);
    out.sigma.resize(static_cast<size_t>(n));
    std::vector<double> superb(static_cast<size_t>(n));
    const int info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'A', 'A', n, n, work.data().data(), n,
                                    out.sigma.data(), out.u.data().data(), n,
                                    out.vh.data().data(), n, superb.data());
    if (info != 0) lapack_fail("zgesvd", info);
    return out;
}

EigNormal normal_eig(const Mat& a, double off_tol_scale) {
    a.require_finite("normal_eig");
    const int n = a.dim();
    Mat t = a;
    Mat z(n);
    std::vector<cplx> w(static_cast<size_t>(n));
    int sdim = 0;
    const int info = LAPACKE_zgees(LAPACK_ROW_MAJOR, 'V', 'N', nullptr, n, t.data().data(), n,
                                   &sdim, w.data(), z.data().data(), n);
    if (info != 0) lapack_fail("zgees", info);
    // Strictly upper-triangular mass of t measures the deviation from
    // normality; a normal input leaves only rounding noise there.
    double off = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c) off += std::norm(t.at(r, c));
    off = std::sqrt(off);
    const double scale = std::max(1.0, fro_norm(a));
    if (off > off_tol_scale * scale)
        fail(ErrorCode::CommutationError,
             "normal_eig: input is not normal (Schur off-diagonal mass " +
                 std::to_string(off) + ")");
    EigNormal out;
    out.values = std::move(w);
    out.vectors = std::move(z);
    return out;
}

double op_norm(const Mat& a) {
    a.require_finite("op_norm");
    if (a.dim() == 1) return std::abs(a.at(0, 0));
    Svd s = svd(a);
    return s.sigma.empty() ? 0.0 : s.sigma.front();
}

Mat assemble_from_eig(const EigH& e, const std::vector<double>& mapped) {
    const int n = e.vectors.dim();
    Mat out(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += e.vectors.at(r, k) * mapped[static_cast<size_t>(k)] *
                       std::conj(e.vectors.at(c, k));
            out.at(r, c) = acc;
        }
    return out;
}

Mat assemble_from_eig_cplx(const EigH& e, const std::vector<cplx>& mapped) {
    const int n = e.vectors.dim();
    Mat out(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += e.vectors.at(r, k) * mapped[static_cast<size_t>(k)] *
                       std::conj(e.vectors.at(c, k));
            out.at(r, c) = acc;
        }
    return out;
}

Mat herm_calculus(const Mat& a, const ScalarFn& g) {
    EigH e = herm_eig(a);
    std::vector<double> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) {
        const double t = e.values[i];
        if (!g.contains(t))
            fail(ErrorCode::DomainError, "herm_calculus: eigenvalue " + std::to_string(t) +
                                             " outside domain of '" + g.name() + "'");
        mapped[i] = g(t);
    }
    return assemble_from_eig(e, mapped);
}

int projection_rank(const Mat& p) {
    EigH e = herm_eig(p);
    int rank = 0;
    for (double v : e.values)
        if (v > 0.5) ++rank;
    return rank;
}

double projection_defect(const Mat& p) {
    return op_norm(p - adjoint(p)) + op_norm(p - mul(p, p));
}

bool is_contract_projection(const Mat& p) {
    return projection_defect(p) <= contract_tol(p.dim());
}

void require_contract_projection(const Mat& p, const char* who) {
    const double d = projection_defect(p);
    if (d > contract_tol(p.dim()))
        fail(ErrorCode::ProjectionError,
             std::string(who) + ": input is not a projection (defect " + std::to_string(d) + ")");
}

Mat herm_inv_sqrt(const Mat& a, double min_eig) {
    EigH e = herm_eig(a);
    std::vector<double> mapped(e.values.size());
    for (size_t i = 0; i < e.values.size(); ++i) {
        if (e.values[i] < min_eig)
            fail(ErrorCode::GapError, "herm_inv_sqrt: eigenvalue " + std::to_string(e.values[i]) +
                                          " below " + std::to_string(min_eig));
        mapped[i] = 1.0 / std::sqrt(e.values[i]);
    }
    return assemble_from_eig(e, mapped);
}

} // namespace liftkit
