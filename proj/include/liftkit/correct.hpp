#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liftkit/block_algebra.hpp"
#include "liftkit/mat.hpp"
#include "liftkit/ncexpr.hpp"

namespace liftkit {

// System of matrix units for a direct sum of blocks, all living in one
// ambient dimension: units (b, s, t) with e_st e_uv = delta_tu e_sv per
// block, diagonal units summing to the ambient identity, e_st* = e_ts.
struct MatrixUnitSystem {
    std::vector<int> structure;
    int ambient_dim = 0;
    // units[b] is an n_b x n_b grid stored row-major.
    std::vector<std::vector<Mat>> units;

    static MatrixUnitSystem empty(std::vector<int> structure, int ambient_dim);

    const Mat& unit(size_t b, int s, int t) const;
    Mat& unit(size_t b, int s, int t);

    // Worst residual over the full product law e_st e_uv = delta_tu e_sv,
    // adjoint symmetry, and the diagonal sum (Frobenius-norm bound, which
    // dominates the operator norm).
    double relation_defect() const;
    // Residual over the generating family only: first-row units are partial
    // isometries onto e_11 with orthogonal sources summing to 1. The full
    // law follows from these identities for systems built as products.
    double generator_defect() const;
    void require_contract_exact(const char* who) const;
};

// Executable corrector for one relation family: maps approximate solution
// tuples to exact ones. `fixed_point` records whether exact inputs come
// back unchanged; `admissible_defect` is the delta below which the
// corrector is guaranteed to succeed.
struct CorrectorFamily {
    std::string name;
    NcExpr relation;
    std::function<std::vector<Mat>(const std::vector<Mat>&)> corrector;
    bool fixed_point = false;
    double admissible_defect = 0.1;
};

// Admissible input defect for the partial-isometry corrector; validated at
// runtime by the spectral-gap check on the compression Q A P A* Q.
inline constexpr double kPartialIsometryDelta = 0.1;

// Spectral retraction: rounds (A + A*)/2 to the nearest projection through
// the 0/1-valued retraction with gap (1/3, 2/3). Eigenvalues inside the
// gap are a precondition violation and reported as such.
Mat correct_projection(const Mat& a);

// Polar correction A (A*A)^{-1/2}; rejects singular input.
Mat correct_unitary(const Mat& a);

// f(Q A P A* Q) Q A P for the inverse-square-root normalizer f. P, Q must
// be contract-exact projections of equal rank.
Mat correct_partial_isometry(const Mat& p, const Mat& q, const Mat& a);

// Rounds a family summing to about 1 into exact pairwise-orthogonal
// projections summing exactly to 1: per-entry rounding, Gram symmetrization
// S^{-1/2} P_j S^{-1/2}, then a sweep that re-rounds inside the remaining
// complement so orthogonality and the sum are exact.
std::vector<Mat> correct_resolution(const std::vector<Mat>& as);

// Rounds diagonal candidates with correct_resolution, the first-row units
// with correct_partial_isometry, and synthesizes the rest as products.
MatrixUnitSystem correct_matrix_units(const MatrixUnitSystem& approx);

// From a generator candidate S of a distinguished size-n block copy,
// rebuilds exact matrix units (shift convention: e_11 = 1 - S*S,
// e_1j = e_11 S^{j-1}), returns the commutant-compressed operators
// T_k := sum_j e_j1 T_k e_1j together with the exact shift generator.
std::pair<std::vector<Mat>, Mat> correct_tensor(const std::vector<Mat>& ts, const Mat& s, int n);

struct DirectSumResult {
    std::vector<Mat> s_blocks;
    std::vector<Mat> t_blocks;
    Mat central; // exact projection E
};

// Rounds the central candidate to an exact projection E through the
// (1/4, 3/4) step and compresses the two families to E and 1-E. Optional
// correctors are applied to the families before compression.
DirectSumResult correct_direct_sum(const std::vector<Mat>& ss, const std::vector<Mat>& ts,
                                   const Mat& qc,
                                   const CorrectorFamily* corr_s = nullptr,
                                   const CorrectorFamily* corr_t = nullptr);

// Corrects sources and ranges with the two families, then replaces each
// V_i by the exact partial isometry between the corrected projections.
std::vector<Mat> glue(const CorrectorFamily& corr_p, const CorrectorFamily& corr_q,
                      const std::vector<Mat>& vs);

// Two-projection correction with prescribed angle parameter: returns exact
// projections with P1 P2 P1 = c * (subprojection of P1). The compression
// spectrum must cluster near {0, c} within min(c, 1-c)/4.
std::pair<Mat, Mat> correct_two_projections(const Mat& a1, const Mat& a2, double c);

// m x m grid of entry matrices for each of `vars` variables.
struct BlockArray {
    int m = 0;
    int vars = 0;
    int entry_dim = 0;
    std::vector<Mat> entries; // index ((i*m)+j)*vars + l

    static BlockArray empty(int m, int vars, int entry_dim);
    Mat& at(int i, int j, int l);
    const Mat& at(int i, int j, int l) const;
};

// Assembles each variable's block matrix, applies the base corrector, and
// re-extracts the entries.
BlockArray correct_blockwise(const BlockArray& in, const CorrectorFamily& base);

Mat assemble_blocks(const BlockArray& in, int l);
BlockArray extract_blocks(const std::vector<Mat>& assembled, int m, int entry_dim);

struct CommutingNormalsResult {
    std::vector<Mat> bs;
    double sum_p_distance = 0.0; // sum over j of ||A_j - B_j||_p
    int sweeps = 0;
    double off_mass = 0.0;       // residual squared off-diagonal mass
    bool converged = true;
};

// Joint approximate diagonalization: Givens sweeps minimizing the summed
// squared off-diagonal moduli of all W* A_j W, then B_j = W diag(...) W*.
// Outputs are exactly normal, exactly commuting, and norm-dominated by the
// inputs; the p-distance is reported, never bounded a priori.
CommutingNormalsResult correct_commuting_normals(const std::vector<Mat>& as, double p,
                                                 const BlockAlgebra* alg = nullptr);

// Piecewise-constant complex interpolant through (point, value) nodes;
// evaluation snaps to the nearest node.
struct TabulatedFn {
    std::vector<double> points;
    std::vector<cplx> values;

    cplx operator()(double t) const;
    Mat apply(const Mat& c) const; // Hermitian calculus with complex values
};

struct SingleGeneratorResult {
    Mat generator;                // Hermitian, eigenvalues 1..m on joint eigenspaces
    std::vector<TabulatedFn> fns; // fns[j](generator) reproduces input j
};

// Joint eigenspace decomposition of an exactly commuting exactly normal
// family; builds the separating Hermitian generator and the interpolants.
SingleGeneratorResult single_generator(const std::vector<Mat>& bs);

// Nearest unitary with equally spaced eigenvalue phases (all power traces
// tau(V^k), 1 <= k <= n-1, vanish): polar correction, eigenphase fit over
// the free rotation, exact reconstruction.
Mat correct_haar(const Mat& u, const BlockAlgebra& alg);

// --- registered corrector families -------------------------------------

CorrectorFamily family_projections(int n);
CorrectorFamily family_resolution(int n);
CorrectorFamily family_two_projections(double c);
// Rounds x0 to a projection and x1 to a projection orthogonal to it.
CorrectorFamily family_orthogonal_pair();

// Lookup for the CLI and glue: "projections", "resolution",
// "two_projections", "orthogonal_pair".
std::optional<CorrectorFamily> family_by_name(const std::string& name, int n, double c = 0.5);

} // namespace liftkit
