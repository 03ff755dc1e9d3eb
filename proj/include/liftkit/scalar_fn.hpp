#pragma once

#include <limits>
#include <string>
#include <vector>

#include "liftkit/error.hpp"

namespace liftkit {

// Piecewise scalar function on the real line. Pieces are closed-on-the-left
// intervals [lo, hi) except the last, which includes its right endpoint;
// adjacent pieces must agree at shared endpoints so the function is
// continuous on its domain. Evaluation outside every piece is a domain
// error (reported with the offending point, which for functional calculus
// is an eigenvalue).
class ScalarFn {
public:
    enum class Kind { Constant, Affine, InvSqrt };

    struct Piece {
        double lo;
        double hi;
        Kind kind;
        double a = 0.0; // Affine: a*t + b
        double b = 0.0; // Constant: value in b
    };

    ScalarFn(std::string name, std::vector<Piece> pieces);

    double operator()(double t) const;
    bool contains(double t) const;
    double domain_lo() const { return pieces_.front().lo; }
    double domain_hi() const { return pieces_.back().hi; }
    const std::string& name() const { return name_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    static constexpr double kInf = std::numeric_limits<double>::infinity();

private:
    std::string name_;
    std::vector<Piece> pieces_;
};

namespace scalar_fns {

// Projection retraction: 0 below 1/3, affine 3t-1 in between, 1 above 2/3.
ScalarFn projection_retraction();

// Partial-isometry normalizer: 0 up to 1/4, affine interpolation on
// (1/4, 3/4), then 1/sqrt(t) from 3/4 on.
ScalarFn isometry_normalizer();

// Central-projection rounding: 0 up to 1/4, affine 2t - 1/2 in between,
// 1 from 3/4 on.
ScalarFn step_quarter_three_quarter();

ScalarFn identity_map();
ScalarFn inv_sqrt();            // 1/sqrt(t) on (0, inf), domain starts just above 0
ScalarFn constant(double c);

} // namespace scalar_fns

} // namespace liftkit
