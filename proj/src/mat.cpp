#include "liftkit/mat.hpp"

#include <cmath>
#include <cstddef>

#include "liftkit/parallel.hpp"

namespace liftkit {

Mat Mat::identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

Mat Mat::diag(const std::vector<cplx>& d) {
    Mat m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m.at(i, i) = d[static_cast<size_t>(i)];
    return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const int n = static_cast<int>(rows.size());
    Mat m(n);
    int r = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n)
            fail(ErrorCode::ShapeMismatch, "from_rows: ragged row");
        int c = 0;
        for (cplx v : row) m.at(r, c++) = v;
        ++r;
    }
    return m;
}

bool Mat::finite() const {
    for (const cplx& v : a_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void Mat::require_finite(const char* who) const {
    if (!finite())
        fail(ErrorCode::InvalidInput, std::string(who) + ": non-finite matrix entry");
}

namespace {

inline cplx dot_row_col(const Mat& x, const Mat& y, int r, int c, int n) {
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) acc += x.at(r, k) * y.at(k, c);
    return acc;
}

} // namespace

Mat mul_serial(const Mat& x, const Mat& y) {
    require_same_dim(x, y, "mul");
    const int n = x.dim();
    Mat z(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            z.at(r, c) = dot_row_col(x, y, r, c, n);
    return z;
}

Mat mul(const Mat& x, const Mat& y) {
    require_same_dim(x, y, "mul");
    const int n = x.dim();
    if (n < kParallelMinDim || thread_cap() == 1) return mul_serial(x, y);
    Mat z(n);
#pragma omp parallel for schedule(static) num_threads(thread_cap())
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            z.at(r, c) = dot_row_col(x, y, r, c, n);
    return z;
}

Mat adjoint(const Mat& x) {
    const int n = x.dim();
    Mat z(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            z.at(r, c) = std::conj(x.at(c, r));
    return z;
}

Mat operator+(const Mat& x, const Mat& y) {
    require_same_dim(x, y, "operator+");
    Mat z = x;
    for (size_t i = 0; i < z.data().size(); ++i) z.data()[i] += y.data()[i];
    return z;
}

Mat operator-(const Mat& x, const Mat& y) {
    require_same_dim(x, y, "operator-");
    Mat z = x;
    for (size_t i = 0; i < z.data().size(); ++i) z.data()[i] -= y.data()[i];
    return z;
}

Mat operator*(const Mat& x, const Mat& y) { return mul(x, y); }

Mat operator*(cplx s, const Mat& x) {
    Mat z = x;
    for (cplx& v : z.data()) v *= s;
    return z;
}

Mat operator-(const Mat& x) { return cplx(-1.0) * x; }

Mat hermitian_part(const Mat& x) { return 0.5 * (x + adjoint(x)); }

cplx trace_raw(const Mat& x) {
    cplx t = 0.0;
    for (int i = 0; i < x.dim(); ++i) t += x.at(i, i);
    return t;
}

double fro_norm(const Mat& x) {
    double s = 0.0;
    for (const cplx& v : x.data()) s += std::norm(v);
    return std::sqrt(s);
}

double max_abs(const Mat& x) {
    double m = 0.0;
    for (const cplx& v : x.data()) m = std::max(m, std::abs(v));
    return m;
}

bool same_dim(const Mat& x, const Mat& y) { return x.dim() == y.dim(); }

void require_same_dim(const Mat& x, const Mat& y, const char* who) {
    if (!same_dim(x, y))
        fail(ErrorCode::ShapeMismatch,
             std::string(who) + ": dimensions " + std::to_string(x.dim()) + " vs " +
                 std::to_string(y.dim()));
}

Mat direct_sum(const Mat& x, const Mat& y) {
    Mat z(x.dim() + y.dim());
    paste_block(z, x, 0, 0);
    paste_block(z, y, x.dim(), x.dim());
    return z;
}

Mat direct_sum(const std::vector<Mat>& blocks) {
    int total = 0;
    for (const Mat& b : blocks) total += b.dim();
    Mat z(total);
    int off = 0;
    for (const Mat& b : blocks) {
        paste_block(z, b, off, off);
        off += b.dim();
    }
    return z;
}

void paste_block(Mat& dst, const Mat& b, int r0, int c0) {
    if (r0 + b.dim() > dst.dim() || c0 + b.dim() > dst.dim())
        fail(ErrorCode::ShapeMismatch, "paste_block: block exceeds target");
    for (int r = 0; r < b.dim(); ++r)
        for (int c = 0; c < b.dim(); ++c)
            dst.at(r0 + r, c0 + c) = b.at(r, c);
}

Mat extract_block(const Mat& x, int r0, int c0, int size) {
    if (r0 + size > x.dim() || c0 + size > x.dim())
        fail(ErrorCode::ShapeMismatch, "extract_block: block exceeds source");
    Mat z(size);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            z.at(r, c) = x.at(r0 + r, c0 + c);
    return z;
}

} // namespace liftkit
