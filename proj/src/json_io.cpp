#include "liftkit/json_io.hpp"

#include <fstream>

namespace liftkit {

namespace {

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

} // namespace

json mat_to_json(const Mat& m) {
    json re = json::array(), im = json::array();
    for (int r = 0; r < m.dim(); ++r) {
        json re_row = json::array(), im_row = json::array();
        for (int c = 0; c < m.dim(); ++c) {
            re_row.push_back(m.at(r, c).real());
            im_row.push_back(m.at(r, c).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return json{{"dim", m.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Mat mat_from_json(const json& j) {
    const int dim = need(j, "dim").get<int>();
    if (dim <= 0) throw SchemaError("matrix dim must be positive");
    const json& re = need(j, "re");
    const json& im = need(j, "im");
    if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != dim ||
        static_cast<int>(im.size()) != dim)
        throw SchemaError("re/im must be dim x dim arrays");
    Mat m(dim);
    for (int r = 0; r < dim; ++r) {
        const json& re_row = re.at(static_cast<size_t>(r));
        const json& im_row = im.at(static_cast<size_t>(r));
        if (static_cast<int>(re_row.size()) != dim || static_cast<int>(im_row.size()) != dim)
            throw SchemaError("re/im must be dim x dim arrays");
        for (int c = 0; c < dim; ++c)
            m.at(r, c) = cplx(re_row.at(static_cast<size_t>(c)).get<double>(),
                              im_row.at(static_cast<size_t>(c)).get<double>());
    }
    return m;
}

json alg_to_json(const BlockAlgebra& a) {
    return json{{"blocks", a.block_dims()}, {"weights", a.weights()}};
}

BlockAlgebra alg_from_json(const json& j) {
    const auto blocks = need(j, "blocks").get<std::vector<int>>();
    if (j.contains("weights"))
        return BlockAlgebra(blocks, j.at("weights").get<std::vector<double>>());
    return BlockAlgebra::proportional(blocks);
}

json scalar_fn_to_json(const ScalarFn& f) {
    json pieces = json::array();
    for (const auto& p : f.pieces()) {
        json piece{{"lo", p.lo}, {"hi", p.hi}};
        switch (p.kind) {
            case ScalarFn::Kind::Constant:
                piece["kind"] = "constant";
                piece["value"] = p.b;
                break;
            case ScalarFn::Kind::Affine:
                piece["kind"] = "affine";
                piece["a"] = p.a;
                piece["b"] = p.b;
                break;
            case ScalarFn::Kind::InvSqrt:
                piece["kind"] = "inv_sqrt";
                break;
        }
        pieces.push_back(std::move(piece));
    }
    return json{{"name", f.name()}, {"pieces", std::move(pieces)}};
}

ScalarFn scalar_fn_from_json(const json& j) {
    std::vector<ScalarFn::Piece> pieces;
    for (const json& pj : need(j, "pieces")) {
        ScalarFn::Piece p;
        p.lo = need(pj, "lo").get<double>();
        p.hi = need(pj, "hi").get<double>();
        const std::string kind = need(pj, "kind").get<std::string>();
        if (kind == "constant") {
            p.kind = ScalarFn::Kind::Constant;
            p.b = need(pj, "value").get<double>();
        } else if (kind == "affine") {
            p.kind = ScalarFn::Kind::Affine;
            p.a = need(pj, "a").get<double>();
            p.b = need(pj, "b").get<double>();
        } else if (kind == "inv_sqrt") {
            p.kind = ScalarFn::Kind::InvSqrt;
        } else {
            throw SchemaError("unknown scalar function piece kind '" + kind + "'");
        }
        pieces.push_back(p);
    }
    return ScalarFn(j.value("name", "anonymous"), std::move(pieces));
}

json expr_to_json(const NcExpr& e) {
    if (!e.valid()) throw SchemaError("cannot serialize empty expression");
    const NcExpr::Node& n = *e.node();
    switch (n.kind) {
        case NcExpr::Kind::Var: return json{{"kind", "var"}, {"index", n.var}};
        case NcExpr::Kind::Unit: return json{{"kind", "unit"}};
        case NcExpr::Kind::Adjoint:
            return json{{"kind", "adjoint"}, {"arg", expr_to_json(n.children[0])}};
        case NcExpr::Kind::Sum:
            return json{{"kind", "sum"},
                        {"left", expr_to_json(n.children[0])},
                        {"right", expr_to_json(n.children[1])}};
        case NcExpr::Kind::Product:
            return json{{"kind", "product"},
                        {"left", expr_to_json(n.children[0])},
                        {"right", expr_to_json(n.children[1])}};
        case NcExpr::Kind::Scale:
            return json{{"kind", "scale"},
                        {"re", n.factor.real()},
                        {"im", n.factor.imag()},
                        {"arg", expr_to_json(n.children[0])}};
        case NcExpr::Kind::HermCalc:
            return json{{"kind", "herm_calc"},
                        {"fn", scalar_fn_to_json(*n.fn)},
                        {"arg", expr_to_json(n.children[0])}};
    }
    throw SchemaError("unknown expression node");
}

NcExpr expr_from_json(const json& j) {
    const std::string kind = need(j, "kind").get<std::string>();
    if (kind == "var") return NcExpr::var(need(j, "index").get<int>());
    if (kind == "unit") return NcExpr::unit();
    if (kind == "adjoint") return expr_from_json(need(j, "arg")).adj();
    if (kind == "sum") return expr_from_json(need(j, "left")) + expr_from_json(need(j, "right"));
    if (kind == "product")
        return expr_from_json(need(j, "left")) * expr_from_json(need(j, "right"));
    if (kind == "scale")
        return cplx(need(j, "re").get<double>(), need(j, "im").get<double>()) *
               expr_from_json(need(j, "arg"));
    if (kind == "herm_calc")
        return expr_from_json(need(j, "arg")).herm_calc(scalar_fn_from_json(need(j, "fn")));
    throw SchemaError("unknown expression kind '" + kind + "'");
}

json report_to_json(const DefectReport& r) {
    json p = json::object();
    for (const auto& [pv, d] : r.p_defects) p[std::to_string(pv)] = d;
    json summands = json::array();
    for (const auto& s : r.summands) {
        json sp = json::object();
        for (const auto& [pv, d] : s.p_defects) sp[std::to_string(pv)] = d;
        summands.push_back(json{{"op", s.op_defect}, {"p", std::move(sp)}});
    }
    return json{{"relation", r.relation_id},
                {"op", r.op_defect},
                {"p", std::move(p)},
                {"summands", std::move(summands)}};
}

json units_to_json(const MatrixUnitSystem& u) {
    json units = json::array();
    for (size_t b = 0; b < u.structure.size(); ++b)
        for (int s = 0; s < u.structure[b]; ++s)
            for (int t = 0; t < u.structure[b]; ++t)
                units.push_back(json{{"block", b},
                                     {"row", s},
                                     {"col", t},
                                     {"mat", mat_to_json(u.unit(b, s, t))}});
    return json{{"structure", u.structure}, {"ambient", u.ambient_dim}, {"units", std::move(units)}};
}

MatrixUnitSystem units_from_json(const json& j) {
    const auto structure = need(j, "structure").get<std::vector<int>>();
    const int ambient = need(j, "ambient").get<int>();
    MatrixUnitSystem u = MatrixUnitSystem::empty(structure, ambient);
    for (const json& uj : need(j, "units")) {
        const size_t b = need(uj, "block").get<size_t>();
        const int s = need(uj, "row").get<int>();
        const int t = need(uj, "col").get<int>();
        if (b >= structure.size() || s < 0 || s >= structure[b] || t < 0 || t >= structure[b])
            throw SchemaError("matrix unit index out of range");
        u.unit(b, s, t) = mat_from_json(need(uj, "mat"));
    }
    return u;
}

json repseq_to_json(const RepSequence& r) {
    json algebras = json::array(), reps = json::array();
    for (const auto& a : r.algebras) algebras.push_back(alg_to_json(a));
    for (const auto& m : r.reps) reps.push_back(mat_to_json(m));
    return json{{"algebras", std::move(algebras)}, {"reps", std::move(reps)}, {"bound", r.bound}};
}

RepSequence repseq_from_json(const json& j) {
    RepSequence r;
    for (const json& aj : need(j, "algebras")) r.algebras.push_back(alg_from_json(aj));
    for (const json& mj : need(j, "reps")) r.reps.push_back(mat_from_json(mj));
    r.bound = j.value("bound", 1.0);
    if (r.algebras.size() != r.reps.size())
        throw SchemaError("algebras and reps must have the same length");
    return r;
}

json filter_to_json(const TailFilter& f) { return json{{"sets", f.sets}}; }

TailFilter filter_from_json(const json& j) {
    TailFilter f;
    f.sets = need(j, "sets").get<std::vector<std::vector<int>>>();
    return f;
}

json inclusion_to_json(const InclusionData& d) {
    return json{{"a_blocks", d.a_blocks}, {"b_blocks", d.b_blocks}, {"mult", d.mult}};
}

InclusionData inclusion_from_json(const json& j) {
    InclusionData d;
    d.a_blocks = need(j, "a_blocks").get<std::vector<int>>();
    d.b_blocks = need(j, "b_blocks").get<std::vector<int>>();
    d.mult = need(j, "mult").get<std::vector<std::vector<int>>>();
    return d;
}

json ensemble_to_json(const EnsembleSpec& s) {
    return json{{"kind", s.kind}, {"dim", s.dim}, {"delta", s.delta}, {"seed", s.seed}};
}

EnsembleSpec ensemble_from_json(const json& j) {
    EnsembleSpec s;
    s.kind = need(j, "kind").get<std::string>();
    s.dim = need(j, "dim").get<int>();
    s.delta = j.value("delta", 0.0);
    s.seed = j.value("seed", 0ull);
    return s;
}

json tuple_to_json(const std::vector<Mat>& mats) {
    json arr = json::array();
    for (const Mat& m : mats) arr.push_back(mat_to_json(m));
    return json{{"mats", std::move(arr)}};
}

std::vector<Mat> tuple_from_json(const json& j) {
    std::vector<Mat> mats;
    if (j.is_object() && j.contains("mats")) {
        for (const json& mj : j.at("mats")) mats.push_back(mat_from_json(mj));
    } else if (j.is_object() && j.contains("dim")) {
        mats.push_back(mat_from_json(j)); // bare matrix file
    } else {
        throw SchemaError("expected {\"mats\": [...]} or a bare matrix object");
    }
    return mats;
}

json chain_to_json(const SpectralChain& c) {
    json projections = json::array();
    for (const Mat& p : c.projections) projections.push_back(mat_to_json(p));
    return json{{"params", c.params}, {"projections", std::move(projections)}, {"traces", c.traces}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("parse error in '" + path + "': " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace liftkit
