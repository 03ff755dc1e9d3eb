#include "liftkit/ncexpr.hpp"

#include <algorithm>
#include <unordered_map>

#include "liftkit/spectral.hpp"

namespace liftkit {

namespace {

std::shared_ptr<const NcExpr::Node> make_node(NcExpr::Node n) {
    return std::make_shared<const NcExpr::Node>(std::move(n));
}

} // namespace

NcExpr NcExpr::var(int index) {
    if (index < 0) fail(ErrorCode::InvalidParameter, "NcExpr::var: negative index");
    Node n{Kind::Var};
    n.var = index;
    return NcExpr(make_node(std::move(n)), index + 1);
}

NcExpr NcExpr::unit() { return NcExpr(make_node(Node{Kind::Unit}), 0); }

NcExpr NcExpr::adj() const {
    Node n{Kind::Adjoint};
    n.children = {*this};
    return NcExpr(make_node(std::move(n)), arity_);
}

NcExpr NcExpr::herm_calc(const ScalarFn& g) const {
    Node n{Kind::HermCalc};
    n.fn = std::make_shared<const ScalarFn>(g);
    n.children = {*this};
    return NcExpr(make_node(std::move(n)), arity_);
}

NcExpr operator+(const NcExpr& a, const NcExpr& b) {
    NcExpr::Node n{NcExpr::Kind::Sum};
    n.children = {a, b};
    return NcExpr(make_node(std::move(n)), std::max(a.arity_, b.arity_));
}

NcExpr operator-(const NcExpr& a, const NcExpr& b) { return a + cplx(-1.0) * b; }

NcExpr operator*(const NcExpr& a, const NcExpr& b) {
    NcExpr::Node n{NcExpr::Kind::Product};
    n.children = {a, b};
    return NcExpr(make_node(std::move(n)), std::max(a.arity_, b.arity_));
}

NcExpr operator*(cplx s, const NcExpr& a) {
    NcExpr::Node n{NcExpr::Kind::Scale};
    n.factor = s;
    n.children = {a};
    return NcExpr(make_node(std::move(n)), a.arity_);
}

NcExpr NcExpr::with_arity(int n) const {
    if (n < arity_)
        fail(ErrorCode::ShapeMismatch, "with_arity: declared arity below used variables");
    return NcExpr(node_, n);
}

NcExpr NcExpr::compose(const std::vector<NcExpr>& subs) const {
    if (!valid()) fail(ErrorCode::InvalidInput, "compose: empty expression");
    if (static_cast<int>(subs.size()) < arity_)
        fail(ErrorCode::ShapeMismatch, "compose: not enough substitutions for arity");
    int out_arity = 0;
    for (const NcExpr& s : subs) out_arity = std::max(out_arity, s.arity());

    std::unordered_map<const Node*, NcExpr> memo;
    auto rec = [&](auto&& self, const NcExpr& e) -> NcExpr {
        auto it = memo.find(e.node());
        if (it != memo.end()) return it->second;
        const Node& n = *e.node();
        NcExpr out;
        switch (n.kind) {
            case Kind::Var: out = subs[static_cast<size_t>(n.var)]; break;
            case Kind::Unit: out = NcExpr::unit(); break;
            case Kind::Adjoint: out = self(self, n.children[0]).adj(); break;
            case Kind::Sum: out = self(self, n.children[0]) + self(self, n.children[1]); break;
            case Kind::Product: out = self(self, n.children[0]) * self(self, n.children[1]); break;
            case Kind::Scale: out = n.factor * self(self, n.children[0]); break;
            case Kind::HermCalc: out = self(self, n.children[0]).herm_calc(*n.fn); break;
        }
        memo.emplace(e.node(), out);
        return out;
    };
    return rec(rec, *this).with_arity(out_arity);
}

std::vector<NcExpr> NcExpr::top_summands() const {
    std::vector<NcExpr> out;
    auto rec = [&](auto&& self, const NcExpr& e) -> void {
        if (e.node()->kind == Kind::Sum) {
            self(self, e.node()->children[0]);
            self(self, e.node()->children[1]);
        } else {
            out.push_back(e);
        }
    };
    rec(rec, *this);
    return out;
}

Mat eval(const NcExpr& e, const std::vector<Mat>& args) {
    if (!e.valid()) fail(ErrorCode::InvalidInput, "eval: empty expression");
    if (static_cast<int>(args.size()) < e.arity())
        fail(ErrorCode::ShapeMismatch, "eval: expression arity " + std::to_string(e.arity()) +
                                           " exceeds argument count " +
                                           std::to_string(args.size()));
    if (args.empty()) fail(ErrorCode::ShapeMismatch, "eval: no arguments");
    const int dim = args[0].dim();
    for (const Mat& a : args) {
        if (a.dim() != dim) fail(ErrorCode::ShapeMismatch, "eval: mixed argument dimensions");
        a.require_finite("eval");
    }

    std::unordered_map<const NcExpr::Node*, Mat> memo;
    auto rec = [&](auto&& self, const NcExpr& x) -> const Mat& {
        auto it = memo.find(x.node());
        if (it != memo.end()) return it->second;
        const NcExpr::Node& n = *x.node();
        Mat value;
        switch (n.kind) {
            case NcExpr::Kind::Var: value = args[static_cast<size_t>(n.var)]; break;
            case NcExpr::Kind::Unit: value = Mat::identity(dim); break;
            case NcExpr::Kind::Adjoint: value = adjoint(self(self, n.children[0])); break;
            case NcExpr::Kind::Sum:
                value = self(self, n.children[0]) + self(self, n.children[1]);
                break;
            case NcExpr::Kind::Product:
                value = mul(self(self, n.children[0]), self(self, n.children[1]));
                break;
            case NcExpr::Kind::Scale: value = n.factor * self(self, n.children[0]); break;
            case NcExpr::Kind::HermCalc:
                value = herm_calculus(self(self, n.children[0]), *n.fn);
                break;
        }
        return memo.emplace(x.node(), std::move(value)).first->second;
    };
    return rec(rec, e);
}

DefectReport defect(const NcExpr& e, const std::vector<Mat>& args, const BlockAlgebra& alg,
                    const std::vector<double>& ps, std::string relation_id) {
    DefectReport rep;
    rep.relation_id = std::move(relation_id);
    const Mat value = eval(e, args);
    rep.op_defect = op_norm(value);
    for (double p : ps) rep.p_defects[p] = alg.p_norm(value, p);
    const std::vector<NcExpr> parts = e.top_summands();
    if (parts.size() > 1) {
        for (const NcExpr& part : parts) {
            DefectReport::Summand s;
            const Mat v = eval(part.with_arity(e.arity()), args);
            s.op_defect = op_norm(v);
            for (double p : ps) s.p_defects[p] = alg.p_norm(v, p);
            rep.summands.push_back(std::move(s));
        }
    }
    return rep;
}

namespace {

NcExpr star_square(const NcExpr& t) { return t.adj() * t; }

} // namespace

NcExpr rel_projection() {
    const NcExpr x = NcExpr::var(0);
    const NcExpr skew = x - x.adj();
    const NcExpr idem = x - x * x;
    return skew * skew + star_square(idem);
}

NcExpr rel_projections(int n) {
    if (n < 1) fail(ErrorCode::InvalidParameter, "rel_projections: n must be positive");
    const NcExpr base = rel_projection();
    NcExpr out;
    for (int j = 0; j < n; ++j) {
        NcExpr term = base.compose({NcExpr::var(j)});
        out = (j == 0) ? term : out + term;
    }
    return out.with_arity(n);
}

NcExpr rel_commutator() {
    const NcExpr x = NcExpr::var(0), y = NcExpr::var(1);
    return x * y - y * x;
}

NcExpr rel_commuting_normals(int n) {
    if (n < 1) fail(ErrorCode::InvalidParameter, "rel_commuting_normals: n must be positive");
    NcExpr out;
    bool first = true;
    auto add = [&](const NcExpr& t) {
        out = first ? t : out + t;
        first = false;
    };
    for (int j = 0; j < n; ++j) {
        const NcExpr x = NcExpr::var(j);
        add(star_square(x * x.adj() - x.adj() * x));
    }
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const NcExpr x = NcExpr::var(j), y = NcExpr::var(k);
            add(star_square(x * y - y * x));
        }
    return out.with_arity(n);
}

NcExpr rel_unitary() {
    const NcExpr x = NcExpr::var(0);
    const NcExpr one = NcExpr::unit();
    return star_square(x.adj() * x - one) + star_square(x * x.adj() - one);
}

NcExpr rel_resolution(int n) {
    NcExpr out = rel_projections(n);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            out = out + star_square(NcExpr::var(j) * NcExpr::var(k));
    NcExpr sum = NcExpr::var(0);
    for (int j = 1; j < n; ++j) sum = sum + NcExpr::var(j);
    out = out + star_square(sum - NcExpr::unit());
    return out.with_arity(n);
}

NcExpr rel_two_projections(double c) {
    const NcExpr p = NcExpr::var(0), q = NcExpr::var(1);
    return rel_projections(2) + star_square(p * q * p - cplx(c) * p);
}

NcExpr rel_glue(const NcExpr& phi, const NcExpr& psi, int n) {
    if (phi.arity() != n || psi.arity() != n)
        fail(ErrorCode::ShapeMismatch, "rel_glue: constituent arities must equal n");
    std::vector<NcExpr> sources, ranges;
    for (int i = 0; i < n; ++i) {
        const NcExpr v = NcExpr::var(i);
        sources.push_back(v.adj() * v);
        ranges.push_back(v * v.adj());
    }
    const NcExpr a = phi.compose(sources);
    const NcExpr b = psi.compose(ranges);
    return (star_square(a) + star_square(b)).with_arity(n);
}

NcExpr rel_tensor(const NcExpr& phi, const NcExpr& rho) {
    if (rho.arity() != 1) fail(ErrorCode::ShapeMismatch, "rel_tensor: rho must have arity 1");
    const int m = phi.arity();
    const NcExpr y = NcExpr::var(m);
    NcExpr out;
    bool first = true;
    auto add = [&](const NcExpr& t) {
        out = first ? t : out + t;
        first = false;
    };
    for (int j = 0; j < m; ++j) {
        const NcExpr x = NcExpr::var(j);
        add(star_square(x * y - y * x));
        add(star_square(x * y.adj() - y.adj() * x));
    }
    add(star_square(phi));
    add(star_square(rho.compose({y})));
    return out.with_arity(m + 1);
}

NcExpr rel_direct_sum(const NcExpr& phi, const NcExpr& psi) {
    const int m = phi.arity();
    const int n = psi.arity();
    std::vector<NcExpr> ys;
    for (int j = 0; j < n; ++j) ys.push_back(NcExpr::var(m + j));
    const NcExpr p = NcExpr::var(m + n);
    NcExpr out = star_square(phi) + star_square(psi.compose(ys));
    out = out + star_square(p - p.adj()) + star_square(p - p * p);
    for (int j = 0; j < m; ++j) {
        const NcExpr x = NcExpr::var(j);
        out = out + star_square(p * x - x * p);
        out = out + star_square(p * x - x);
    }
    for (int j = 0; j < n; ++j) {
        const NcExpr y = NcExpr::var(m + j);
        out = out + star_square(p * y - y * p);
    }
    return out.with_arity(m + n + 1);
}

NcExpr rel_block_generator(int n) {
    if (n < 2) fail(ErrorCode::InvalidParameter, "rel_block_generator: n must be at least 2");
    const NcExpr y = NcExpr::var(0);
    const NcExpr one = NcExpr::unit();
    const NcExpr e11 = one - y.adj() * y;
    std::vector<NcExpr> e1(static_cast<size_t>(n));
    e1[0] = e11;
    for (int j = 1; j < n; ++j) e1[static_cast<size_t>(j)] = e1[static_cast<size_t>(j - 1)] * y;
    NcExpr out = star_square(e11 - e11.adj()) + star_square(e11 - e11 * e11);
    // Each e_1j is a partial isometry from its source onto e_11, sources
    // are pairwise orthogonal and fill the space.
    NcExpr source_sum;
    for (int j = 0; j < n; ++j) {
        const NcExpr& v = e1[static_cast<size_t>(j)];
        out = out + star_square(v * v.adj() - e11);
        out = out + star_square(e11 * v - v);
        const NcExpr src = v.adj() * v;
        source_sum = (j == 0) ? src : source_sum + src;
        for (int k = j + 1; k < n; ++k)
            out = out + star_square(v * e1[static_cast<size_t>(k)].adj());
    }
    out = out + star_square(source_sum - one);
    return out.with_arity(1);
}

NcExpr relation_by_name(const std::string& name, int n, double c) {
    if (name == "projection") return n <= 1 ? rel_projection() : rel_projections(n);
    if (name == "commutator") return rel_commutator();
    if (name == "unitary") return rel_unitary();
    if (name == "resolution") return rel_resolution(n);
    if (name == "commuting_normals") return rel_commuting_normals(n);
    if (name == "glue") return rel_glue(rel_projections(n), rel_projections(n), n);
    if (name == "tensor") return rel_tensor(rel_projections(std::max(1, n - 1)), rel_block_generator(2));
    if (name == "direct_sum") return rel_direct_sum(rel_projections(1), rel_projections(1));
    if (name == "two_projections") return rel_two_projections(c);
    if (name == "block_generator") return rel_block_generator(n);
    fail(ErrorCode::InvalidParameter, "unknown relation '" + name + "'");
}

} // namespace liftkit
