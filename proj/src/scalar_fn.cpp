#include "liftkit/scalar_fn.hpp"

#include <cmath>
#include <utility>

namespace liftkit {

namespace {

double eval_piece(const ScalarFn::Piece& p, double t) {
    switch (p.kind) {
        case ScalarFn::Kind::Constant: return p.b;
        case ScalarFn::Kind::Affine: return p.a * t + p.b;
        case ScalarFn::Kind::InvSqrt: return 1.0 / std::sqrt(t);
    }
    return 0.0;
}

} // namespace

ScalarFn::ScalarFn(std::string name, std::vector<Piece> pieces)
    : name_(std::move(name)), pieces_(std::move(pieces)) {
    if (pieces_.empty()) fail(ErrorCode::InvalidInput, "ScalarFn: no pieces");
    for (size_t i = 0; i < pieces_.size(); ++i) {
        if (!(pieces_[i].lo < pieces_[i].hi))
            fail(ErrorCode::InvalidInput, "ScalarFn '" + name_ + "': empty piece");
        if (i > 0) {
            if (pieces_[i].lo != pieces_[i - 1].hi)
                fail(ErrorCode::InvalidInput,
                     "ScalarFn '" + name_ + "': pieces do not cover a connected interval");
            const double t = pieces_[i].lo;
            if (std::isfinite(t)) {
                const double left = eval_piece(pieces_[i - 1], t);
                const double right = eval_piece(pieces_[i], t);
                if (std::abs(left - right) > 1e-12 * (1.0 + std::abs(left)))
                    fail(ErrorCode::InvalidInput,
                         "ScalarFn '" + name_ + "': discontinuity at " + std::to_string(t));
            }
        }
    }
}

bool ScalarFn::contains(double t) const {
    return t >= domain_lo() && t <= domain_hi();
}

double ScalarFn::operator()(double t) const {
    if (!contains(t))
        fail(ErrorCode::DomainError,
             "ScalarFn '" + name_ + "': point " + std::to_string(t) + " outside domain");
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const bool last = (i + 1 == pieces_.size());
        if (t < pieces_[i].hi || (last && t <= pieces_[i].hi))
            return eval_piece(pieces_[i], t);
    }
    return eval_piece(pieces_.back(), t);
}

namespace scalar_fns {

using Kind = ScalarFn::Kind;
constexpr double kInf = ScalarFn::kInf;

ScalarFn projection_retraction() {
    return ScalarFn("projection_retraction",
                    {{-kInf, 1.0 / 3.0, Kind::Constant, 0.0, 0.0},
                     {1.0 / 3.0, 2.0 / 3.0, Kind::Affine, 3.0, -1.0},
                     {2.0 / 3.0, kInf, Kind::Constant, 0.0, 1.0}});
}

ScalarFn isometry_normalizer() {
    // Affine piece joins 0 at 1/4 to 1/sqrt(3/4) at 3/4.
    const double slope = (1.0 / std::sqrt(0.75)) / 0.5;
    return ScalarFn("isometry_normalizer",
                    {{-kInf, 0.25, Kind::Constant, 0.0, 0.0},
                     {0.25, 0.75, Kind::Affine, slope, -0.25 * slope},
                     {0.75, kInf, Kind::InvSqrt, 0.0, 0.0}});
}

ScalarFn step_quarter_three_quarter() {
    return ScalarFn("step_quarter_three_quarter",
                    {{-kInf, 0.25, Kind::Constant, 0.0, 0.0},
                     {0.25, 0.75, Kind::Affine, 2.0, -0.5},
                     {0.75, kInf, Kind::Constant, 0.0, 1.0}});
}

ScalarFn identity_map() {
    return ScalarFn("identity", {{-kInf, kInf, Kind::Affine, 1.0, 0.0}});
}

ScalarFn inv_sqrt() {
    return ScalarFn("inv_sqrt", {{1e-300, kInf, Kind::InvSqrt, 0.0, 0.0}});
}

ScalarFn constant(double c) {
    return ScalarFn("constant", {{-kInf, kInf, Kind::Constant, 0.0, c}});
}

} // namespace scalar_fns

} // namespace liftkit
