#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "liftkit/block_algebra.hpp"
#include "liftkit/mat.hpp"
#include "liftkit/scalar_fn.hpp"

namespace liftkit {

// Expression DAG over noncommutative variables: *-polynomials extended by
// Hermitian functional-calculus nodes. Values are immutable and cheap to
// share; evaluation is pure.
class NcExpr {
public:
    enum class Kind { Var, Unit, Adjoint, Sum, Product, Scale, HermCalc };

    struct Node {
        Kind kind;
        int var = -1;                        // Var
        cplx factor = 1.0;                   // Scale
        std::shared_ptr<const ScalarFn> fn;  // HermCalc
        std::vector<NcExpr> children;
    };

    NcExpr() = default;

    static NcExpr var(int index);
    static NcExpr unit();

    NcExpr adj() const;
    NcExpr herm_calc(const ScalarFn& g) const;

    friend NcExpr operator+(const NcExpr& a, const NcExpr& b);
    friend NcExpr operator-(const NcExpr& a, const NcExpr& b);
    friend NcExpr operator*(const NcExpr& a, const NcExpr& b);
    friend NcExpr operator*(cplx s, const NcExpr& a);

    // Substitutes subs[j] for variable j; arity becomes the maximum of the
    // substituted expressions' arities.
    NcExpr compose(const std::vector<NcExpr>& subs) const;

    // Declared arity; defaults to max used variable index + 1.
    int arity() const { return arity_; }
    NcExpr with_arity(int n) const;

    const Node* node() const { return node_.get(); }
    bool valid() const { return node_ != nullptr; }

    // Splits the root sum chain into top-level summands (the expression
    // itself if the root is not a sum).
    std::vector<NcExpr> top_summands() const;

private:
    explicit NcExpr(std::shared_ptr<const Node> n, int arity)
        : node_(std::move(n)), arity_(arity) {}

    std::shared_ptr<const Node> node_;
    int arity_ = 0;
};

// Evaluates on a tuple of equal-dimension matrices. Shared DAG nodes are
// evaluated once per call.
Mat eval(const NcExpr& e, const std::vector<Mat>& args);

struct DefectReport {
    std::string relation_id;
    double op_defect = 0.0;
    std::map<double, double> p_defects;
    struct Summand {
        double op_defect = 0.0;
        std::map<double, double> p_defects;
    };
    std::vector<Summand> summands;
};

// Norms of eval(e, args) with a per-summand breakdown when the root is a
// sum. For relations of the shape sum_i T_i* T_i the square root of each
// summand's norm bounds the constituent defect.
DefectReport defect(const NcExpr& e, const std::vector<Mat>& args, const BlockAlgebra& alg,
                    const std::vector<double>& ps, std::string relation_id = "");

// --- relation builders ------------------------------------------------

// (x - x*)^2 + (x - x^2)*(x - x^2); vanishes exactly on projections.
NcExpr rel_projection();
// Independent projection relations on each of n variables.
NcExpr rel_projections(int n);
// x0 x1 - x1 x0 (linear, not squared; its norm is the commutator norm).
NcExpr rel_commutator();
// Normality and pairwise commutation residuals, squared form.
NcExpr rel_commuting_normals(int n);
// (x*x - 1)*(x*x - 1) + (xx* - 1)*(xx* - 1).
NcExpr rel_unitary();
// Projections, pairwise orthogonality, and sum-to-one terms.
NcExpr rel_resolution(int n);
// Projection terms plus (x0 x1 x0 - c x0)*(x0 x1 x0 - c x0).
NcExpr rel_two_projections(double c);
// phi on the tuple (V_i* V_i), psi on (V_i V_i*), glued as
// phi(...)*phi(...) + psi(...)*psi(...).
NcExpr rel_glue(const NcExpr& phi, const NcExpr& psi, int n);
// Composite relation for "phi-tuple commuting with a matrix-block
// generator": commutators with y and y*, plus phi*phi and rho*rho.
NcExpr rel_tensor(const NcExpr& phi, const NcExpr& rho);
// Composite relation for a direct sum with central projection p (the last
// variable): phi*phi + psi*psi + projection terms for p + commutators +
// the absorption terms (p x_j - x_j)*(p x_j - x_j).
NcExpr rel_direct_sum(const NcExpr& phi, const NcExpr& psi);
// Relation satisfied exactly when y is a shift-style generator of a full
// matrix-block copy of size n: the derived unit candidates
// e_11 = 1 - y*y, e_1j = e_11 y^{j-1} must form a matrix-unit family.
NcExpr rel_block_generator(int n);

// Relation lookup for the CLI: "projection", "commutator", "unitary",
// "resolution", "commuting_normals", "glue", "tensor", "direct_sum",
// "two_projections", "block_generator". Arity-parameterized names take n.
NcExpr relation_by_name(const std::string& name, int n, double c = 0.5);

} // namespace liftkit
