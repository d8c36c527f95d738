#pragma once

// JSON serialization for configs, bounds, estimates, and audits.

#include <string>

#include <json.hpp>

#include "qknit/bounds.hpp"
#include "qknit/estimator.hpp"
#include "qknit/qpd.hpp"

namespace qknit {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrices and spaces

inline Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const Json& j) {
  const int rows = j.at("rows"), cols = j.at("cols");
  const auto& data = j.at("data");
  if (int(data.size()) != rows * cols) throw ConfigError("matrix_from_json: size mismatch");
  Matrix m(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c, ++k)
      m(i, c) = Cplx(data[k][0].get<double>(), data[k][1].get<double>());
  return m;
}

inline Party party_from_name(const std::string& s) {
  for (Party p : {Party::A, Party::B, Party::AncA, Party::AncB, Party::RefA, Party::RefB})
    if (s == party_name(p)) return p;
  throw ConfigError("unknown party name: " + s);
}

inline Json space_to_json(const Space& s) {
  Json out = Json::array();
  for (const auto& f : s) out.push_back({{"party", party_name(f.party)}, {"dim", f.dim}});
  return out;
}

inline Space space_from_json(const Json& j) {
  Space s;
  for (const auto& f : j) s.push_back({party_from_name(f.at("party")), f.at("dim")});
  return s;
}

// ---------------------------------------------------------------------------
// Resources

inline Json resource_to_json(const ResourceState& r) {
  switch (r.kind) {
    case ResourceState::Kind::Separable: return Json{{"kind", "separable"}};
    case ResourceState::Kind::Bell: return Json{{"kind", "bell"}, {"d", r.d}};
    case ResourceState::Kind::Psi: return Json{{"kind", "psi"}, {"r", r.r}};
    case ResourceState::Kind::PureSchmidt:
      return Json{{"kind", "pure_schmidt"}, {"coeffs", r.coeffs}};
  }
  throw ConfigError("resource_to_json: unknown kind");
}

inline ResourceState resource_from_json(const Json& j) {
  const std::string kind = j.at("kind");
  if (kind == "separable") return ResourceState::separable();
  if (kind == "bell") return ResourceState::bell(j.at("d"));
  if (kind == "psi") return ResourceState::psi(j.at("r"));
  if (kind == "pure_schmidt")
    return ResourceState::pure_schmidt(j.at("coeffs").get<std::vector<double>>());
  throw ConfigError("unknown resource kind: " + kind);
}

// ---------------------------------------------------------------------------
// Stages, terms, configs

inline Json stage_to_json(const Stage& stage) {
  if (const auto* op = std::get_if<OpStage>(&stage))
    return Json{{"type", "op"}, {"first", op->first}, {"count", op->count},
                {"u", matrix_to_json(op->u)}};
  if (const auto* ins = std::get_if<InsertStage>(&stage))
    return Json{{"type", "insert"},
                {"position", ins->position},
                {"space", space_to_json(ins->ins_space)},
                {"rho", matrix_to_json(ins->rho)},
                {"resource", resource_to_json(ins->resource)},
                {"entangled", ins->entangled}};
  if (const auto* ms = std::get_if<MeasureStage>(&stage)) {
    Json outs = Json::array();
    for (const auto& o : ms->outcomes) {
      Json jo{{"effect", matrix_to_json(o.effect)}, {"sign", o.sign}};
      if (o.corr_count > 0) {
        jo["corr_first"] = o.corr_first;
        jo["corr_count"] = o.corr_count;
        jo["correction"] = matrix_to_json(o.correction);
      }
      outs.push_back(std::move(jo));
    }
    return Json{{"type", "measure"}, {"first", ms->first}, {"count", ms->count},
                {"outcomes", outs}};
  }
  const auto& is = std::get<InstrumentStage>(stage);
  Json brs = Json::array();
  for (const auto& b : is.branches)
    brs.push_back({{"k", matrix_to_json(b.k)}, {"sign", b.sign}});
  Json j{{"type", "instrument"},
         {"first", is.first},
         {"count", is.count},
         {"branches", brs},
         {"classical_bits", is.classical_bits}};
  if (is.relabel) j["relabel"] = party_name(*is.relabel);
  return j;
}

inline Stage stage_from_json(const Json& j) {
  const std::string type = j.at("type");
  if (type == "op")
    return OpStage{j.at("first"), j.at("count"), matrix_from_json(j.at("u"))};
  if (type == "insert")
    return InsertStage{j.at("position"), space_from_json(j.at("space")),
                       matrix_from_json(j.at("rho")), resource_from_json(j.at("resource")),
                       j.at("entangled")};
  if (type == "measure") {
    MeasureStage ms;
    ms.first = j.at("first");
    ms.count = j.at("count");
    for (const auto& jo : j.at("outcomes")) {
      MeasureOutcome o;
      o.effect = matrix_from_json(jo.at("effect"));
      o.sign = jo.at("sign");
      if (jo.contains("correction")) {
        o.corr_first = jo.at("corr_first");
        o.corr_count = jo.at("corr_count");
        o.correction = matrix_from_json(jo.at("correction"));
      }
      ms.outcomes.push_back(std::move(o));
    }
    return ms;
  }
  if (type == "instrument") {
    InstrumentStage is;
    is.first = j.at("first");
    is.count = j.at("count");
    is.classical_bits = j.at("classical_bits");
    for (const auto& jb : j.at("branches"))
      is.branches.push_back({matrix_from_json(jb.at("k")), jb.at("sign")});
    if (j.contains("relabel")) is.relabel = party_from_name(j.at("relabel"));
    return is;
  }
  throw ConfigError("unknown stage type: " + type);
}

inline Json config_to_json(const QpdConfig& c) {
  Json terms = Json::array();
  for (const auto& t : c.terms) {
    Json stages = Json::array();
    for (const auto& s : t.stages) stages.push_back(stage_to_json(s));
    terms.push_back({{"probability", t.probability}, {"stages", stages}});
  }
  return Json{{"kind", c.kind},
              {"in_space", space_to_json(c.in_space)},
              {"out_space", space_to_json(c.out_space)},
              {"gamma", c.gamma},
              {"constructive", c.constructive},
              {"locality", c.locality},
              {"note", c.note},
              {"resource", resource_to_json(c.resource)},
              {"terms", terms}};
}

inline QpdConfig config_from_json(const Json& j) {
  QpdConfig c;
  c.kind = j.at("kind");
  c.in_space = space_from_json(j.at("in_space"));
  c.out_space = space_from_json(j.at("out_space"));
  c.gamma = j.at("gamma");
  c.constructive = j.at("constructive");
  c.locality = j.value("locality", "LO");
  c.note = j.at("note");
  c.resource = resource_from_json(j.at("resource"));
  for (const auto& jt : j.at("terms")) {
    QpdTerm t;
    t.probability = jt.at("probability");
    for (const auto& js : jt.at("stages")) t.stages.push_back(stage_from_json(js));
    c.terms.push_back(std::move(t));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Results

inline Json estimate_to_json(const EstimateResult& r) {
  Json counts = Json::object();
  for (const auto& [term, n] : r.branch_counts) counts[std::to_string(term)] = n;
  return Json{{"mean", r.mean},   {"std_error", r.std_error},    {"shots", r.shots},
              {"gamma", r.gamma}, {"seed", r.seed},              {"branch_counts", counts}};
}

inline Json bounds_to_json(const BoundSet& b) {
  Json j{{"lambdas", b.lambdas},
         {"l1_sq", b.l1_sq},
         {"l2_sq", b.l2_sq},
         {"lower_schmidt", b.lower_schmidt},
         {"upper_bell", b.upper_bell},
         {"upper_free", b.upper_free},
         {"regularized", b.regularized},
         {"entropy_bits", b.entropy_bits}};
  j["lower_entropy"] = b.lower_entropy ? Json(*b.lower_entropy) : Json(nullptr);
  j["free_optimal_kak"] = b.free_optimal_kak ? Json(*b.free_optimal_kak) : Json(nullptr);
  j["upper_psi_r"] = b.upper_psi_r ? Json(*b.upper_psi_r) : Json(nullptr);
  if (!b.reason.empty()) j["reason"] = b.reason;
  return j;
}

inline Json audit_to_json(const LocalityAudit& a) {
  Json j{{"class", a.regime()},
         {"classical_bits", a.classical_bits},
         {"entanglement_assisted", a.entanglement_assisted}};
  if (a.offending_term) j["offending_term"] = *a.offending_term;
  return j;
}

inline Json accounting_to_json(const BellAccounting& a) {
  return Json{{"p_bell", a.p_bell}, {"expected_bells", a.expected_bells}};
}

inline Json accounting_to_json(const ConfigBellAccounting& a) {
  return Json{{"p_bell", a.p_bell},
              {"gamma", a.gamma},
              {"expected_bells_per_sample", a.expected_bells_per_sample},
              {"expected_bells", a.expected_bells}};
}

}  // namespace qknit
