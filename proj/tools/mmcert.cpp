// mmcert — check optimality certificates for constrained minimax candidates
// and cross-examine them with brute-force grid oracles.
//
// Exit codes: 0 the requested run completed (whatever the verdicts),
//             2 the input was rejected (file, schema, expression, candidate),
//             3 an internal consistency guarantee broke mid-run.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "mmcert/certify.hpp"
#include "mmcert/errors.hpp"
#include "mmcert/expr.hpp"
#include "mmcert/oracle.hpp"
#include "mmcert/problem_io.hpp"

namespace {

using nlohmann::ordered_json;

struct CliArgs {
  std::string path;
  bool json = false;
  std::optional<int> seed;
  std::optional<int> mesh;
  std::optional<int> samples;
  std::string csv_path;   // tau-profile only
  bool box_only = false;  // classify only
};

// precedence: built-in defaults < problem-file options < command-line flags
mmcert::certify::Options certify_options(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  mmcert::certify::Options o;
  const auto& f = pf.options;
  if (f.tol) o.tol = *f.tol;
  if (f.strict_margin) o.strict_margin = *f.strict_margin;
  if (f.activity_tol) o.activity_tol = *f.activity_tol;
  if (f.membership_tol) o.membership_tol = *f.membership_tol;
  if (f.eig_tol) o.eig_tol = *f.eig_tol;
  if (f.samples) o.samples = *f.samples;
  if (f.seed) o.seed = static_cast<std::uint64_t>(*f.seed);
  if (f.max_enum) o.max_enum = *f.max_enum;
  if (a.samples) o.samples = *a.samples;
  if (a.seed) o.seed = static_cast<std::uint64_t>(*a.seed);
  return o;
}

mmcert::oracle::GridSpec grid_spec(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  mmcert::oracle::GridSpec g = mmcert::oracle::GridSpec::defaults();
  const auto& f = pf.options;
  if (f.mesh_per_axis) g.mesh_per_axis = *f.mesh_per_axis;
  if (f.kappa_max) g.kappa_max = *f.kappa_max;
  if (f.value_tol) g.value_tol = *f.value_tol;
  if (f.delta_values) g.delta_values = *f.delta_values;
  if (a.mesh) g.mesh_per_axis = *a.mesh;
  g.validate();
  return g;
}

const mmcert::oracle::Box* box_of(const mmcert::io::ProblemFile& pf) {
  return pf.box ? &*pf.box : nullptr;
}

ordered_json report_head(const char* sub, const mmcert::io::ProblemFile& pf) {
  ordered_json o;
  o["tool"] = "mmcert";
  o["version"] = MMCERT_VERSION;
  o["subcommand"] = sub;
  o["input_digest"] = mmcert::io::input_digest(pf.source_text);
  ordered_json pj;
  pj["n"] = pf.problem.n;
  pj["m"] = pf.problem.m;
  pj["objective"] = mmcert::expr::serialize(pf.problem.f);
  o["problem"] = std::move(pj);
  return o;
}

std::string fmt(double v) { return mmcert::expr::format_double(v); }

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

std::string fmt_point(const mmcert::expr::Point& p) {
  return "x=" + fmt_vec(p.x) + " y=" + fmt_vec(p.y);
}

void print_outcome(std::ostream& os, const char* name, const mmcert::certify::CheckOutcome& c) {
  os << "  " << std::left << std::setw(26) << name << " ";
  if (!c.applicable) {
    os << "not applicable";
  } else {
    os << mmcert::certify::to_string(c.verdict) << " (" << mmcert::certify::to_string(c.mode)
       << ")";
  }
  if (c.witness) {
    const auto& w = *c.witness;
    os << "  value=" << fmt(w.value);
    if (w.u.size()) os << " u=" << fmt_vec(w.u);
    if (w.h.size()) os << " h=" << fmt_vec(w.h);
    if (!w.detail.empty()) os << " [" << w.detail << "]";
  }
  if (!c.note.empty()) os << "  -- " << c.note;
  os << "\n";
}

void print_certificate(std::ostream& os, const mmcert::certify::CertificateReport& rep) {
  os << rep.conclusion << "\n\nchecks:\n";
  print_outcome(os, "separation", rep.separation);
  print_outcome(os, "first_order_primal_min", rep.first_order_primal_min);
  print_outcome(os, "first_order_primal_max", rep.first_order_primal_max);
  print_outcome(os, "first_order_dual_min", rep.first_order_dual_min);
  print_outcome(os, "first_order_dual_max", rep.first_order_dual_max);
  print_outcome(os, "so_necessary_max", rep.so_necessary_max);
  print_outcome(os, "so_sufficient_max", rep.so_sufficient_max);
  print_outcome(os, "schur_necessary", rep.schur_necessary);
  print_outcome(os, "schur_sufficient", rep.schur_sufficient);
  print_outcome(os, "so_necessary_joint", rep.so_necessary_joint);
  print_outcome(os, "so_sufficient_joint", rep.so_sufficient_joint);
  print_outcome(os, "nonsmooth_necessary_max", rep.nonsmooth_necessary_max);
  print_outcome(os, "nonsmooth_necessary_joint", rep.nonsmooth_necessary_joint);
  print_outcome(os, "weak_sufficient", rep.weak_sufficient);
  os << "assumptions:\n";
  for (const auto& a : rep.assumptions) os << "  - " << a << "\n";
}

void print_verdict(std::ostream& os, const char* name, const mmcert::oracle::VerdictEvidence& v) {
  os << "  " << std::left << std::setw(22) << name << " " << mmcert::oracle::to_string(v.value);
  if (v.witness) os << "  witness " << fmt_point(*v.witness);
  if (!v.note.empty()) os << "  -- " << v.note;
  os << "\n";
}

void print_classification(std::ostream& os, const mmcert::oracle::ClassificationReport& rep) {
  os << "classification (mesh " << rep.mesh_per_axis << " per axis, finest delta "
     << fmt(rep.finest_delta) << "):\n";
  print_verdict(os, "nash", rep.nash);
  print_verdict(os, "local_nash", rep.local_nash);
  print_verdict(os, "local_minimax", rep.local_minimax);
  print_verdict(os, "calm_local_minimax", rep.calm_local_minimax);
  print_verdict(os, "global_minimax_on_box", rep.global_minimax_on_box);
}

void print_tau(std::ostream& os, const mmcert::oracle::TauProfile& tp) {
  os << "tau profile:\n" << mmcert::oracle::tau_profile_csv(tp);
  if (tp.stress_x) os << "# stress_x=" << fmt_vec(*tp.stress_x) << "\n";
  if (!tp.note.empty()) os << "# " << tp.note << "\n";
}

void print_argmax(std::ostream& os, const mmcert::oracle::ArgmaxCalmness& ac) {
  os << "argmax sensitivity (kappa_hat=" << fmt(ac.kappa_hat) << "):\n";
  for (const auto& r : ac.rows)
    os << "  delta=" << fmt(r.delta) << " radius=" << fmt(r.radius)
       << " kappa_hat=" << fmt(r.kappa_hat) << "\n";
}

void write_csv(const std::string& path, const mmcert::oracle::TauProfile& tp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mmcert::ValidationError("cannot write csv file: " + path);
  out << mmcert::oracle::tau_profile_csv(tp);
}

void emit(const ordered_json& o) { std::cout << o.dump(2) << "\n"; }

int run_certify(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  auto rep = mmcert::certify::certify(pf.problem, pf.candidate, certify_options(pf, a));
  if (a.json) {
    ordered_json o = report_head("certify", pf);
    o["certificate"] = mmcert::io::to_json(rep);
    emit(o);
  } else {
    print_certificate(std::cout, rep);
  }
  return 0;
}

int run_classify(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  auto grid = grid_spec(pf, a);
  auto rep = mmcert::oracle::classify(pf.problem, pf.candidate, grid, box_of(pf));
  if (a.json) {
    ordered_json o = report_head("classify", pf);
    ordered_json c = mmcert::io::to_json(rep);
    if (a.box_only) {
      ordered_json trimmed;
      trimmed["nash"] = c["nash"];
      trimmed["global_minimax_on_box"] = c["global_minimax_on_box"];
      trimmed["mesh_per_axis"] = c["mesh_per_axis"];
      c = std::move(trimmed);
    }
    o["classification"] = std::move(c);
    emit(o);
  } else if (a.box_only) {
    std::cout << "classification (mesh " << rep.mesh_per_axis << " per axis, box only):\n";
    print_verdict(std::cout, "nash", rep.nash);
    print_verdict(std::cout, "global_minimax_on_box", rep.global_minimax_on_box);
  } else {
    print_classification(std::cout, rep);
  }
  return 0;
}

int run_tau(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  auto grid = grid_spec(pf, a);
  auto tp = mmcert::oracle::tau_profile(pf.problem, pf.candidate, grid, box_of(pf));
  if (!a.csv_path.empty()) write_csv(a.csv_path, tp);
  if (a.json) {
    ordered_json o = report_head("tau-profile", pf);
    o["tau_profile"] = mmcert::io::to_json(tp);
    emit(o);
  } else {
    print_tau(std::cout, tp);
  }
  return 0;
}

int run_oracle(const mmcert::io::ProblemFile& pf, const CliArgs& a) {
  auto grid = grid_spec(pf, a);
  auto cls = mmcert::oracle::classify(pf.problem, pf.candidate, grid, box_of(pf));

  // The candidate may fail the max-side precondition outright; classification
  // already records that, so keep the run alive and report the gap instead of
  // aborting the whole oracle pass.
  std::optional<mmcert::oracle::TauProfile> tp;
  std::optional<mmcert::oracle::ArgmaxCalmness> ac;
  std::string tau_error;
  try {
    tp = mmcert::oracle::tau_profile(pf.problem, pf.candidate, grid, box_of(pf));
    ac = mmcert::oracle::argmax_calmness(pf.problem, pf.candidate, grid, *tp);
  } catch (const mmcert::NotMaxSide& e) {
    tau_error = e.what();
  }

  if (!a.csv_path.empty() && tp) write_csv(a.csv_path, *tp);
  if (a.json) {
    ordered_json o = report_head("oracle", pf);
    o["classification"] = mmcert::io::to_json(cls);
    if (tp) {
      o["tau_profile"] = mmcert::io::to_json(*tp);
      o["argmax_calmness"] = mmcert::io::to_json(*ac);
    } else {
      o["tau_profile"] = ordered_json{{"error", tau_error}};
    }
    emit(o);
  } else {
    print_classification(std::cout, cls);
    if (tp) {
      print_tau(std::cout, *tp);
      print_argmax(std::cout, *ac);
    } else {
      std::cout << "tau profile: skipped -- " << tau_error << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certificate checks and grid oracles for constrained minimax candidates"};
  app.require_subcommand(1);

  CliArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", args.path, "problem description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_flag("--json", args.json, "emit a machine-readable run report on stdout");
    sub->add_option("--seed", args.seed, "RNG seed for sampled fallbacks (default 0)");
    sub->add_option("--mesh", args.mesh, "grid nodes per axis (odd)");
    sub->add_option("--samples", args.samples, "direction samples for sampled checks");
  };

  CLI::App* certify = app.add_subcommand("certify", "run the optimality condition checks");
  add_common(certify);
  CLI::App* oracle =
      app.add_subcommand("oracle", "full grid oracle: classification, tau profile, argmax");
  add_common(oracle);
  oracle->add_option("--csv", args.csv_path, "also write the tau profile as CSV");
  CLI::App* classify = app.add_subcommand("classify", "grid classification of the candidate");
  add_common(classify);
  classify->add_flag("--box-only", args.box_only, "report only the bounding-box verdicts");
  CLI::App* tau = app.add_subcommand("tau-profile", "recovery-radius profile over delta");
  add_common(tau);
  tau->add_option("--csv", args.csv_path, "write the profile as CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // anything but --help/--version is an input error
  }

  try {
    mmcert::io::ProblemFile pf = mmcert::io::load_problem(args.path);
    if (certify->parsed()) return run_certify(pf, args);
    if (oracle->parsed()) return run_oracle(pf, args);
    if (classify->parsed()) return run_classify(pf, args);
    return run_tau(pf, args);
  } catch (const mmcert::InternalInconsistency& e) {
    std::cerr << "internal inconsistency: " << e.what() << "\n";
    return 3;
  } catch (const mmcert::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
