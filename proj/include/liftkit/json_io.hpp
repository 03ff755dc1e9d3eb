#pragma once

#include <string>

#include <json.hpp>

#include "liftkit/block_algebra.hpp"
#include "liftkit/correct.hpp"
#include "liftkit/ensembles.hpp"
#include "liftkit/mat.hpp"
#include "liftkit/ncexpr.hpp"
#include "liftkit/ultra.hpp"

namespace liftkit {

using nlohmann::json;

// Malformed files and schema violations; the CLI maps these to exit code 1
// (mathematical precondition failures, liftkit::Error, map to exit 2).
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);

json alg_to_json(const BlockAlgebra& a);
BlockAlgebra alg_from_json(const json& j);

json scalar_fn_to_json(const ScalarFn& f);
ScalarFn scalar_fn_from_json(const json& j);

json expr_to_json(const NcExpr& e);
NcExpr expr_from_json(const json& j);

json report_to_json(const DefectReport& r);

json units_to_json(const MatrixUnitSystem& u);
MatrixUnitSystem units_from_json(const json& j);

json repseq_to_json(const RepSequence& r);
RepSequence repseq_from_json(const json& j);

json filter_to_json(const TailFilter& f);
TailFilter filter_from_json(const json& j);

json inclusion_to_json(const InclusionData& d);
InclusionData inclusion_from_json(const json& j);

json ensemble_to_json(const EnsembleSpec& s);
EnsembleSpec ensemble_from_json(const json& j);

// Generic tuple container {"mats": [...]}.
json tuple_to_json(const std::vector<Mat>& mats);
std::vector<Mat> tuple_from_json(const json& j);

json chain_to_json(const SpectralChain& c);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

} // namespace liftkit
