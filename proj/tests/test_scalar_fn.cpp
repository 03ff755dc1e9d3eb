#include <doctest.h>

#include <cmath>

#include "liftkit/scalar_fn.hpp"

using namespace liftkit;

TEST_CASE("projection retraction values") {
    const ScalarFn h = scalar_fns::projection_retraction();
    CHECK(h(-0.2) == 0.0);
    CHECK(h(0.05) == 0.0);
    CHECK(h(1.0 / 3.0) == 0.0);
    CHECK(h(0.5) == doctest::Approx(0.5));
    CHECK(h(2.0 / 3.0) == 1.0);
    CHECK(h(0.95) == 1.0);
    CHECK(h(1.2) == 1.0);
}

TEST_CASE("isometry normalizer matches 1/sqrt(t) above 3/4 and vanishes below 1/4") {
    const ScalarFn f = scalar_fns::isometry_normalizer();
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.25) == 0.0);
    CHECK(f(0.81) == doctest::Approx(1.0 / 0.9));
    CHECK(f(1.0) == doctest::Approx(1.0));
    CHECK(f(1.25) == doctest::Approx(1.0 / std::sqrt(1.25)));
    // The extension keeps 1/sqrt(t) beyond 5/4.
    CHECK(f(1.5) == doctest::Approx(1.0 / std::sqrt(1.5)));
}

TEST_CASE("quarter step function") {
    const ScalarFn f = scalar_fns::step_quarter_three_quarter();
    CHECK(f(0.1) == 0.0);
    CHECK(f(0.25) == 0.0);
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f(0.75) == 1.0);
    CHECK(f(0.9) == 1.0);
}

TEST_CASE("pieces agree at endpoints (continuity)") {
    for (const ScalarFn& f : {scalar_fns::projection_retraction(), scalar_fns::isometry_normalizer(),
                              scalar_fns::step_quarter_three_quarter()}) {
        for (size_t i = 1; i < f.pieces().size(); ++i) {
            const double t = f.pieces()[i].lo;
            const double eps = 1e-9;
            CHECK(std::abs(f(t - eps) - f(t + eps)) < 1e-7);
        }
    }
}

TEST_CASE("discontinuous pieces are rejected") {
    using K = ScalarFn::Kind;
    CHECK_THROWS_AS(ScalarFn("bad", {{0.0, 1.0, K::Constant, 0.0, 0.0},
                                     {1.0, 2.0, K::Constant, 0.0, 5.0}}),
                    Error);
    CHECK_THROWS_AS(ScalarFn("gap", {{0.0, 1.0, K::Constant, 0.0, 0.0},
                                     {1.5, 2.0, K::Constant, 0.0, 0.0}}),
                    Error);
}

TEST_CASE("evaluation outside the domain is a domain error") {
    const ScalarFn f = scalar_fns::inv_sqrt();
    CHECK_THROWS_AS(f(-1.0), Error);
    CHECK(f(4.0) == doctest::Approx(0.5));
}
