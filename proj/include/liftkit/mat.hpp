#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "liftkit/error.hpp"

namespace liftkit {

using cplx = std::complex<double>;

// Dense complex square matrix, row-major, double precision. Immutable by
// convention once handed to an operation; all arithmetic returns new values.
class Mat {
public:
    Mat() = default;
    explicit Mat(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim) {
        if (dim <= 0) fail(ErrorCode::InvalidInput, "matrix dimension must be positive");
    }

    static Mat identity(int dim);
    static Mat zeros(int dim) { return Mat(dim); }
    static Mat diag(const std::vector<cplx>& d);
    static Mat from_rows(std::initializer_list<std::initializer_list<cplx>> rows);

    int dim() const { return dim_; }
    cplx& at(int r, int c) { return a_[static_cast<size_t>(r) * dim_ + c]; }
    const cplx& at(int r, int c) const { return a_[static_cast<size_t>(r) * dim_ + c]; }

    std::vector<cplx>& data() { return a_; }
    const std::vector<cplx>& data() const { return a_; }

    bool finite() const;
    void require_finite(const char* who) const;

private:
    int dim_ = 0;
    std::vector<cplx> a_;
};

// Reference kernel: plain triple loop, always serial. Kept as the oracle
// the parallel kernel is tested against.
Mat mul_serial(const Mat& x, const Mat& y);

// Production kernel: OpenMP over rows for dim >= kParallelMinDim. Each
// output entry is accumulated in the same order as the serial kernel, so
// the two agree bit for bit.
Mat mul(const Mat& x, const Mat& y);

Mat adjoint(const Mat& x);
Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(cplx s, const Mat& x);
Mat operator-(const Mat& x);

inline Mat commutator(const Mat& x, const Mat& y) { return mul(x, y) - mul(y, x); }
Mat hermitian_part(const Mat& x);   // (x + x*)/2

cplx trace_raw(const Mat& x);       // unnormalized sum of diagonal entries
double fro_norm(const Mat& x);
double max_abs(const Mat& x);

bool same_dim(const Mat& x, const Mat& y);
void require_same_dim(const Mat& x, const Mat& y, const char* who);

// Block helpers (used by direct sums, blockwise correction, matrix units).
Mat direct_sum(const Mat& x, const Mat& y);
Mat direct_sum(const std::vector<Mat>& blocks);
// Copies `b` into `dst` with top-left corner at (r0, c0).
void paste_block(Mat& dst, const Mat& b, int r0, int c0);
// Extracts the square block of size `size` at (r0, c0).
Mat extract_block(const Mat& x, int r0, int c0, int size);

} // namespace liftkit
