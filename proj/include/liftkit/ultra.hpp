#pragma once

#include <vector>

#include "liftkit/block_algebra.hpp"
#include "liftkit/correct.hpp"
#include "liftkit/mat.hpp"

namespace liftkit {

// Finite truncation of a representative sequence: one element per index,
// each living in its own tracial algebra, uniformly norm-bounded.
struct RepSequence {
    std::vector<BlockAlgebra> algebras;
    std::vector<Mat> reps;
    double bound = 1.0;

    size_t size() const { return reps.size(); }
    void validate(const char* who) const;
};

// Nested index sets E_1 >= E_2 >= ... with E_1 the full index set; the
// finite shadow of a nontrivial ultrafilter's witnessing sequence.
struct TailFilter {
    std::vector<std::vector<int>> sets;

    static TailFilter full(int n_indices, int levels);
    void validate(int n_indices, const char* who) const;
    bool contains(size_t level, int index) const;
};

// Increasing projections P(t) with traces tracking the grid parameters up
// to the algebra's quantization atom.
struct SpectralChain {
    std::vector<double> params;
    std::vector<Mat> projections;
    std::vector<double> traces;
};

struct TailProfile {
    double limit_estimate = 0.0;   // p-norm at the largest index
    std::vector<double> profile;   // per-index p-norms
};

// Per-index p-norms with the tail estimate; membership in the vanishing
// ideal at tolerance theta means limit_estimate < theta.
TailProfile tail_p_norm(const RepSequence& x, double p);

struct DiagonalCompletionResult {
    RepSequence completed;
    std::vector<std::vector<int>> f_sets; // F_n per row (0-based storage, rows are 1-based in messages)
    std::vector<int> chosen_row;          // per index, the row the diagonal picked
};

// Telescoping diagonal completion of a 2-norm Cauchy array: selects
// X_i = A_{k(i), i} with k(i) the largest row whose tolerance set F_k
// contains i, so that ||A_n - X||_2 <= 2/4^n <= 1/2^n on F_n.
DiagonalCompletionResult diagonal_completion(const std::vector<std::vector<Mat>>& rows,
                                             const std::vector<BlockAlgebra>& algebras,
                                             const TailFilter& filter);

// Per index, a projection comparable to the input (P <= A or A <= P) whose
// trace is the closest to t reachable by rank adjustment. The comparable
// pair satisfies ||A - P||_2 = sqrt(|tau(P) - tau(A)|).
RepSequence lift_projection_trace(const RepSequence& a, double t);

// Per index, a nested chain through the spectral projections of T_i,
// refined by rank padding so traces match the grid up to quantization.
std::vector<SpectralChain> lift_chain(const RepSequence& t, const std::vector<double>& grid);

struct PartialIsometryLift {
    RepSequence lifted;
    std::vector<double> distance_profile; // ||V_i - W_i||_2 per index
};

// Per index, the polar partial-isometry factor of F_i W_i E_i (singular
// values below 1e-8 are zeroed); exact from E_i to F_i.
PartialIsometryLift lift_partial_isometry(const RepSequence& e, const RepSequence& f,
                                          const RepSequence& w);

// One step of a Bratteli diagram: block sizes of the smaller algebra, of
// the larger one, and the multiplicity of each small block in each large
// block (mult[large][small]).
struct InclusionData {
    std::vector<int> a_blocks;
    std::vector<int> b_blocks;
    std::vector<std::vector<int>> mult;

    void validate(const char* who) const;
};

// Extends per-index representations of the small algebra's matrix units to
// exact unit systems for the large algebra: diagonal refinement inside the
// images of the small diagonal units, within-copy off-diagonal units from
// products with the given images, and cross-copy connectors either matched
// to the supplied targets or synthesized from the refinement bases.
// targets, when present, holds per index one candidate per connector in
// block-major, copy-major order (first copy of each block is the anchor).
std::vector<MatrixUnitSystem> extend_matrix_units(
    const InclusionData& inc, const std::vector<MatrixUnitSystem>& pi,
    const std::vector<std::vector<Mat>>* targets = nullptr);

// Iterated extension along an inclusion chain starting from the scalars
// (structure [1], unit = ambient identity): tower[level][index], level 0
// being the scalars.
std::vector<std::vector<MatrixUnitSystem>> bratteli_lift(const std::vector<InclusionData>& chain,
                                                         int depth,
                                                         const std::vector<int>& ambient_dims);

} // namespace liftkit
