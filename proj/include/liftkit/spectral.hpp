#pragma once

#include <vector>

#include "liftkit/mat.hpp"
#include "liftkit/scalar_fn.hpp"

namespace liftkit {

// Tolerances of the exactness contract. "X is exactly a projection" etc.
// means the relation residual is below contract_tol(dim) in operator norm.
inline double contract_tol(int dim) { return 1e-10 * dim; }
// Inputs to Hermitian functional calculus may deviate from selfadjointness
// by this much; they are symmetrized before decomposition.
inline double hermitian_tol(int dim) { return 1e-8 * dim; }

struct EigH {
    std::vector<double> values; // ascending; ties broken by LAPACK's ordering
    Mat vectors;                // columns are orthonormal eigenvectors
};

struct Svd {
    Mat u;
    std::vector<double> sigma;  // descending
    Mat vh;
};

// Hermitian eigendecomposition (input symmetrized to (A+A*)/2 first when
// within hermitian_tol, rejected otherwise).
EigH herm_eig(const Mat& a);

Svd svd(const Mat& a);

// Schur decomposition a = z t z*; for normal inputs t is diagonal up to
// rounding, which normal_eig checks before returning eigenvalues/vectors.
struct EigNormal {
    std::vector<cplx> values;
    Mat vectors;
};
EigNormal normal_eig(const Mat& a, double off_tol_scale = 1e-7);

// Largest singular value.
double op_norm(const Mat& a);

// U g(D) U* for the symmetrized input. Every eigenvalue must lie in g's
// domain; the offending eigenvalue is named otherwise.
Mat herm_calculus(const Mat& a, const ScalarFn& g);

// Reassembles U f(D) U* for an already-computed decomposition.
Mat assemble_from_eig(const EigH& e, const std::vector<double>& mapped);
Mat assemble_from_eig_cplx(const EigH& e, const std::vector<cplx>& mapped);

// Number of eigenvalues above 1/2; the rank of a contract-exact projection.
int projection_rank(const Mat& p);

// Residual of the projection relation in operator norm:
// ||p - p*|| + ||p - p^2||.
double projection_defect(const Mat& p);

bool is_contract_projection(const Mat& p);
void require_contract_projection(const Mat& p, const char* who);

// Hermitian inverse square root via eigendecomposition; eigenvalues must
// exceed min_eig.
Mat herm_inv_sqrt(const Mat& a, double min_eig);

} // namespace liftkit
