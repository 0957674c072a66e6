#include "mmcert/problem_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmcert/cones.hpp"
#include "mmcert/errors.hpp"

namespace mmcert::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kFeasTol = 1e-9;

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ValidationError("unknown field '" + it.key() + "' in " + where);
  }
}

const json& need(const json& j, const char* field, const std::string& where) {
  auto it = j.find(field);
  if (it == j.end())
    throw ValidationError("missing field '" + std::string(field) + "' in " + where);
  return *it;
}

int need_int(const json& j, const char* field, const std::string& where) {
  const json& v = need(j, field, where);
  if (!v.is_number_integer())
    throw ValidationError("field '" + std::string(field) + "' in " + where +
                          " must be an integer");
  return v.get<int>();
}

std::string need_string(const json& j, const char* field, const std::string& where) {
  const json& v = need(j, field, where);
  if (!v.is_string())
    throw ValidationError("field '" + std::string(field) + "' in " + where +
                          " must be a string");
  return v.get<std::string>();
}

Eigen::VectorXd number_array(const json& v, const std::string& where) {
  if (!v.is_array())
    throw ValidationError(where + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ValidationError(where + " must contain only numbers");
    out[i++] = e.get<double>();
  }
  return out;
}

cones::ConstraintSystem parse_constraints(const json& root, const char* field,
                                          expr::Axis block, int n, int m) {
  cones::ConstraintSystem cs;
  cs.block = block;
  cs.n = n;
  cs.m = m;
  auto it = root.find(field);
  if (it == root.end()) return cs;
  if (!it->is_array())
    throw ValidationError(std::string(field) + " must be an array");
  int idx = 0;
  for (const auto& entry : *it) {
    const std::string where = std::string(field) + "[" + std::to_string(idx) + "]";
    if (!entry.is_object())
      throw ValidationError(where + " must be an object");
    expect_keys(entry, {"expr", "kind"}, where);
    const std::string text = need_string(entry, "expr", where);
    const std::string kind = need_string(entry, "kind", where);
    cones::Constraint c;
    c.e = expr::parse_expression(text, n, m);
    if (kind == "le")
      c.kind = cones::ConstraintKind::LessEqual;
    else if (kind == "eq")
      c.kind = cones::ConstraintKind::Equal;
    else
      throw ValidationError(where + ".kind must be \"le\" or \"eq\"");
    cs.constraints.push_back(std::move(c));
    ++idx;
  }
  return cs;
}

void parse_bounds(const json& v, int count, const std::string& where,
                  Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  if (!v.is_array() || static_cast<int>(v.size()) != count)
    throw ValidationError(where + " must be an array of " + std::to_string(count) +
                          " [lo, hi] pairs");
  lo.resize(count);
  hi.resize(count);
  int i = 0;
  for (const auto& pair : v) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number())
      throw ValidationError(where + "[" + std::to_string(i) +
                            "] must be a [lo, hi] pair of numbers");
    lo[i] = pair[0].get<double>();
    hi[i] = pair[1].get<double>();
    ++i;
  }
}

void check_candidate_feasible(const cones::ConstraintSystem& cs,
                              const Eigen::VectorXd& z, const char* which) {
  if (cs.empty()) return;
  const Eigen::VectorXd v = cs.values(z);
  for (int i = 0; i < v.size(); ++i) {
    const bool bad = cs.constraints[i].kind == cones::ConstraintKind::Equal
                         ? std::abs(v[i]) > kFeasTol
                         : v[i] > kFeasTol;
    if (bad)
      throw ValidationError("candidate violates " + std::string(which) + "[" +
                            std::to_string(i) + "] (value " +
                            expr::format_double(v[i]) + ")");
  }
}

template <class T>
void read_opt(const json& j, const char* field, std::optional<T>& slot,
              const std::string& where) {
  auto it = j.find(field);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, int>) {
    if (!it->is_number_integer())
      throw ValidationError("option '" + std::string(field) + "' in " + where +
                            " must be an integer");
    slot = it->get<int>();
  } else {
    if (!it->is_number())
      throw ValidationError("option '" + std::string(field) + "' in " + where +
                            " must be a number");
    slot = it->get<double>();
  }
}

// ---------------------------------------------------------------------------
// non-finite-safe number encoding

ordered_json num_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError(where + " is not a number or non-finite marker");
}

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num_json(v[i]));
  return a;
}

Eigen::VectorXd vec_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + " must be an array");
  Eigen::VectorXd out(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& e : j) out[i++] = num_from(e, where);
  return out;
}

ordered_json point_json(const expr::Point& p) {
  ordered_json o;
  o["x"] = vec_json(p.x);
  o["y"] = vec_json(p.y);
  return o;
}

expr::Point point_from(const json& j, const std::string& where) {
  expr::Point p;
  p.x = vec_from(need(j, "x", where), where + ".x");
  p.y = vec_from(need(j, "y", where), where + ".y");
  return p;
}

certify::Verdict verdict_from(const std::string& s, const std::string& where) {
  if (s == "holds") return certify::Verdict::Holds;
  if (s == "fails") return certify::Verdict::Fails;
  if (s == "vacuous") return certify::Verdict::Vacuous;
  if (s == "inconclusive") return certify::Verdict::Inconclusive;
  throw ValidationError(where + " carries an unknown verdict '" + s + "'");
}

oracle::TriState tristate_from(const std::string& s, const std::string& where) {
  if (s == "true") return oracle::TriState::True;
  if (s == "false") return oracle::TriState::False;
  if (s == "undetermined") return oracle::TriState::Undetermined;
  throw ValidationError(where + " carries an unknown tristate '" + s + "'");
}

certify::CheckOutcome outcome_from(const json& j, const std::string& where) {
  certify::CheckOutcome c;
  c.verdict = verdict_from(need(j, "verdict", where).get<std::string>(), where);
  c.mode = need(j, "mode", where).get<std::string>() == "proved"
               ? certify::Mode::Proved
               : certify::Mode::Sampled;
  c.applicable = need(j, "applicable", where).get<bool>();
  const json& w = need(j, "witness", where);
  if (!w.is_null()) {
    certify::Witness wit;
    wit.u = vec_from(need(w, "u", where), where + ".witness.u");
    wit.h = vec_from(need(w, "h", where), where + ".witness.h");
    wit.value = num_from(need(w, "value", where), where + ".witness.value");
    wit.detail = need(w, "detail", where).get<std::string>();
    c.witness = std::move(wit);
  }
  c.note = need(j, "note", where).get<std::string>();
  return c;
}

oracle::VerdictEvidence evidence_from(const json& j, const std::string& where) {
  oracle::VerdictEvidence v;
  v.value = tristate_from(need(j, "value", where).get<std::string>(), where);
  const json& w = need(j, "witness", where);
  if (!w.is_null()) v.witness = point_from(w, where + ".witness");
  v.note = need(j, "note", where).get<std::string>();
  return v;
}

}  // namespace

ProblemFile parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ValidationError("problem file root must be an object");
  expect_keys(j,
              {"n", "m", "objective", "x_constraints", "y_constraints", "candidate",
               "box", "assume_mscq", "options"},
              "the problem file");

  ProblemFile pf;
  pf.source_text = text;
  const int n = need_int(j, "n", "the problem file");
  const int m = need_int(j, "m", "the problem file");
  if (n < 1 || m < 1)
    throw ValidationError("n and m must be at least 1");
  pf.problem.n = n;
  pf.problem.m = m;
  pf.problem.f = expr::parse_expression(need_string(j, "objective", "the problem file"), n, m);
  pf.problem.x_constraints = parse_constraints(j, "x_constraints", expr::Axis::X, n, m);
  pf.problem.y_constraints = parse_constraints(j, "y_constraints", expr::Axis::Y, n, m);

  const json& cand = need(j, "candidate", "the problem file");
  if (!cand.is_object())
    throw ValidationError("candidate must be an object with x and y arrays");
  expect_keys(cand, {"x", "y"}, "candidate");
  pf.candidate.x = number_array(need(cand, "x", "candidate"), "candidate.x");
  pf.candidate.y = number_array(need(cand, "y", "candidate"), "candidate.y");
  if (pf.candidate.n() != n)
    throw ValidationError("candidate.x length " + std::to_string(pf.candidate.n()) +
                          " does not match n = " + std::to_string(n));
  if (pf.candidate.m() != m)
    throw ValidationError("candidate.y length " + std::to_string(pf.candidate.m()) +
                          " does not match m = " + std::to_string(m));

  if (auto it = j.find("box"); it != j.end()) {
    if (!it->is_object())
      throw ValidationError("box must be an object with x and y bounds");
    expect_keys(*it, {"x", "y"}, "box");
    oracle::Box box;
    parse_bounds(need(*it, "x", "box"), n, "box.x", box.x_lo, box.x_hi);
    parse_bounds(need(*it, "y", "box"), m, "box.y", box.y_lo, box.y_hi);
    pf.box = std::move(box);
  }

  if (auto it = j.find("assume_mscq"); it != j.end()) {
    if (!it->is_boolean())
      throw ValidationError("assume_mscq must be a boolean");
    pf.problem.assume_mscq = it->get<bool>();
  }

  if (auto it = j.find("options"); it != j.end()) {
    const json& o = *it;
    if (!o.is_object())
      throw ValidationError("options must be an object");
    expect_keys(o,
                {"tol", "strict_margin", "activity_tol", "membership_tol", "eig_tol",
                 "samples", "seed", "max_enum", "mesh_per_axis", "kappa_max",
                 "value_tol", "delta_values"},
                "options");
    read_opt(o, "tol", pf.options.tol, "options");
    read_opt(o, "strict_margin", pf.options.strict_margin, "options");
    read_opt(o, "activity_tol", pf.options.activity_tol, "options");
    read_opt(o, "membership_tol", pf.options.membership_tol, "options");
    read_opt(o, "eig_tol", pf.options.eig_tol, "options");
    read_opt(o, "samples", pf.options.samples, "options");
    read_opt(o, "seed", pf.options.seed, "options");
    read_opt(o, "max_enum", pf.options.max_enum, "options");
    read_opt(o, "mesh_per_axis", pf.options.mesh_per_axis, "options");
    read_opt(o, "kappa_max", pf.options.kappa_max, "options");
    read_opt(o, "value_tol", pf.options.value_tol, "options");
    if (auto dv = o.find("delta_values"); dv != o.end()) {
      const Eigen::VectorXd v = number_array(*dv, "options.delta_values");
      pf.options.delta_values =
          std::vector<double>(v.data(), v.data() + v.size());
    }
  }

  pf.problem.validate();
  check_candidate_feasible(pf.problem.x_constraints, pf.candidate.x, "x_constraints");
  check_candidate_feasible(pf.problem.y_constraints, pf.candidate.y, "y_constraints");
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("cannot read problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str());
}

std::string input_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// report mirrors

ordered_json to_json(const certify::CheckOutcome& c) {
  ordered_json o;
  o["verdict"] = certify::to_string(c.verdict);
  o["mode"] = certify::to_string(c.mode);
  o["applicable"] = c.applicable;
  if (c.witness) {
    ordered_json w;
    w["u"] = vec_json(c.witness->u);
    w["h"] = vec_json(c.witness->h);
    w["value"] = num_json(c.witness->value);
    w["detail"] = c.witness->detail;
    o["witness"] = std::move(w);
  } else {
    o["witness"] = nullptr;
  }
  o["note"] = c.note;
  return o;
}

ordered_json to_json(const certify::CertificateReport& rep) {
  ordered_json o;
  o["separation"] = to_json(rep.separation);
  o["first_order_primal_min"] = to_json(rep.first_order_primal_min);
  o["first_order_primal_max"] = to_json(rep.first_order_primal_max);
  o["first_order_dual_min"] = to_json(rep.first_order_dual_min);
  o["first_order_dual_max"] = to_json(rep.first_order_dual_max);
  o["so_necessary_max"] = to_json(rep.so_necessary_max);
  o["so_sufficient_max"] = to_json(rep.so_sufficient_max);
  o["schur_necessary"] = to_json(rep.schur_necessary);
  o["schur_sufficient"] = to_json(rep.schur_sufficient);
  o["so_necessary_joint"] = to_json(rep.so_necessary_joint);
  o["so_sufficient_joint"] = to_json(rep.so_sufficient_joint);
  o["nonsmooth_necessary_max"] = to_json(rep.nonsmooth_necessary_max);
  o["nonsmooth_necessary_joint"] = to_json(rep.nonsmooth_necessary_joint);
  o["weak_sufficient"] = to_json(rep.weak_sufficient);
  o["assumptions"] = rep.assumptions;
  o["conclusion"] = rep.conclusion;
  return o;
}

ordered_json to_json(const oracle::VerdictEvidence& v) {
  ordered_json o;
  o["value"] = oracle::to_string(v.value);
  o["witness"] = v.witness ? ordered_json(point_json(*v.witness)) : ordered_json(nullptr);
  o["note"] = v.note;
  return o;
}

ordered_json to_json(const oracle::ClassificationReport& rep) {
  ordered_json o;
  o["nash"] = to_json(rep.nash);
  o["local_nash"] = to_json(rep.local_nash);
  o["local_minimax"] = to_json(rep.local_minimax);
  o["calm_local_minimax"] = to_json(rep.calm_local_minimax);
  o["global_minimax_on_box"] = to_json(rep.global_minimax_on_box);
  o["mesh_per_axis"] = rep.mesh_per_axis;
  o["finest_delta"] = num_json(rep.finest_delta);
  return o;
}

ordered_json to_json(const oracle::TauProfile& tp) {
  ordered_json o;
  ordered_json rows = ordered_json::array();
  for (const auto& r : tp.rows) {
    ordered_json row;
    row["delta"] = num_json(r.delta);
    row["tau_min"] = num_json(r.tau_min);
    row["ratio"] = num_json(r.ratio);
    rows.push_back(std::move(row));
  }
  o["rows"] = std::move(rows);
  o["fitted_exponent"] = num_json(tp.fitted_exponent);
  o["calm_verdict"] = oracle::to_string(tp.calm_verdict);
  o["stress_x"] = tp.stress_x ? ordered_json(vec_json(*tp.stress_x)) : ordered_json(nullptr);
  o["note"] = tp.note;
  return o;
}

ordered_json to_json(const oracle::ArgmaxCalmness& ac) {
  ordered_json o;
  ordered_json rows = ordered_json::array();
  for (const auto& r : ac.rows) {
    ordered_json row;
    row["delta"] = num_json(r.delta);
    row["radius"] = num_json(r.radius);
    row["kappa_hat"] = num_json(r.kappa_hat);
    rows.push_back(std::move(row));
  }
  o["rows"] = std::move(rows);
  o["kappa_hat"] = num_json(ac.kappa_hat);
  return o;
}

certify::CertificateReport certificate_from_json(const json& j) {
  certify::CertificateReport rep;
  rep.separation = outcome_from(need(j, "separation", "certificate"), "separation");
  rep.first_order_primal_min =
      outcome_from(need(j, "first_order_primal_min", "certificate"), "first_order_primal_min");
  rep.first_order_primal_max =
      outcome_from(need(j, "first_order_primal_max", "certificate"), "first_order_primal_max");
  rep.first_order_dual_min =
      outcome_from(need(j, "first_order_dual_min", "certificate"), "first_order_dual_min");
  rep.first_order_dual_max =
      outcome_from(need(j, "first_order_dual_max", "certificate"), "first_order_dual_max");
  rep.so_necessary_max =
      outcome_from(need(j, "so_necessary_max", "certificate"), "so_necessary_max");
  rep.so_sufficient_max =
      outcome_from(need(j, "so_sufficient_max", "certificate"), "so_sufficient_max");
  rep.schur_necessary =
      outcome_from(need(j, "schur_necessary", "certificate"), "schur_necessary");
  rep.schur_sufficient =
      outcome_from(need(j, "schur_sufficient", "certificate"), "schur_sufficient");
  rep.so_necessary_joint =
      outcome_from(need(j, "so_necessary_joint", "certificate"), "so_necessary_joint");
  rep.so_sufficient_joint =
      outcome_from(need(j, "so_sufficient_joint", "certificate"), "so_sufficient_joint");
  rep.nonsmooth_necessary_max =
      outcome_from(need(j, "nonsmooth_necessary_max", "certificate"), "nonsmooth_necessary_max");
  rep.nonsmooth_necessary_joint = outcome_from(
      need(j, "nonsmooth_necessary_joint", "certificate"), "nonsmooth_necessary_joint");
  rep.weak_sufficient =
      outcome_from(need(j, "weak_sufficient", "certificate"), "weak_sufficient");
  for (const auto& a : need(j, "assumptions", "certificate"))
    rep.assumptions.push_back(a.get<std::string>());
  rep.conclusion = need(j, "conclusion", "certificate").get<std::string>();
  return rep;
}

oracle::ClassificationReport classification_from_json(const json& j) {
  oracle::ClassificationReport rep;
  rep.nash = evidence_from(need(j, "nash", "classification"), "nash");
  rep.local_nash = evidence_from(need(j, "local_nash", "classification"), "local_nash");
  rep.local_minimax =
      evidence_from(need(j, "local_minimax", "classification"), "local_minimax");
  rep.calm_local_minimax = evidence_from(need(j, "calm_local_minimax", "classification"),
                                         "calm_local_minimax");
  rep.global_minimax_on_box = evidence_from(
      need(j, "global_minimax_on_box", "classification"), "global_minimax_on_box");
  rep.mesh_per_axis = need(j, "mesh_per_axis", "classification").get<int>();
  rep.finest_delta = num_from(need(j, "finest_delta", "classification"), "finest_delta");
  return rep;
}

oracle::TauProfile tau_profile_from_json(const json& j) {
  oracle::TauProfile tp;
  for (const auto& r : need(j, "rows", "tau profile")) {
    oracle::TauRow row;
    row.delta = num_from(need(r, "delta", "tau row"), "delta");
    row.tau_min = num_from(need(r, "tau_min", "tau row"), "tau_min");
    row.ratio = num_from(need(r, "ratio", "tau row"), "ratio");
    tp.rows.push_back(row);
  }
  tp.fitted_exponent =
      num_from(need(j, "fitted_exponent", "tau profile"), "fitted_exponent");
  const std::string cv = need(j, "calm_verdict", "tau profile").get<std::string>();
  if (cv == "calm")
    tp.calm_verdict = oracle::CalmVerdict::Calm;
  else if (cv == "not_calm")
    tp.calm_verdict = oracle::CalmVerdict::NotCalm;
  else
    tp.calm_verdict = oracle::CalmVerdict::Undetermined;
  const json& sx = need(j, "stress_x", "tau profile");
  if (!sx.is_null()) tp.stress_x = vec_from(sx, "stress_x");
  tp.note = need(j, "note", "tau profile").get<std::string>();
  return tp;
}

}  // namespace mmcert::io
