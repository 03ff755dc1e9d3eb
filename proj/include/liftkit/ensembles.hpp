#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liftkit/correct.hpp"
#include "liftkit/mat.hpp"
#include "liftkit/ncexpr.hpp"

namespace liftkit {

// Seeded generator request. Perturbative kinds rescale the perturbation
// until the measured defect lands in [delta/2, 2*delta]; clock_shift and
// haar_unitary ignore delta (their defect is determined by the dimension
// or is zero).
struct EnsembleSpec {
    std::string kind; // near_projection, near_unitary, near_partial_isometry,
                      // near_matrix_units, almost_commuting_pair, clock_shift,
                      // haar_unitary, near_resolution
    int dim = 2;
    double delta = 0.0;
    uint64_t seed = 0;
};

struct GeneratedInstance {
    std::vector<Mat> mats;
    // Linear defect functional of the kind (e.g. max of ||A - A*|| and
    // ||A - A^2|| for near_projection), in operator norm.
    double measured_defect = 0.0;
    // The same measurement packaged as a report: op_defect is the linear
    // functional, p_defects[2] its 2-norm analogue, one summand per
    // residual term.
    DefectReport report;
    // Present for near_matrix_units: the candidate system the flat tuple
    // was extracted from.
    std::optional<MatrixUnitSystem> units;
};

GeneratedInstance generate(const EnsembleSpec& spec);

bool is_perturbative_kind(const std::string& kind);

} // namespace liftkit
