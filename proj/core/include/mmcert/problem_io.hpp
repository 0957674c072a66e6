#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmcert/certify.hpp"
#include "mmcert/kkt.hpp"
#include "mmcert/oracle.hpp"

namespace mmcert::io {

// Optional overrides carried by the problem file's "options" object.
// Command-line flags take precedence over these, and these over defaults.
struct OptionOverrides {
  std::optional<double> tol, strict_margin, activity_tol, membership_tol, eig_tol;
  std::optional<int> samples, seed, max_enum;
  std::optional<int> mesh_per_axis;
  std::optional<double> kappa_max, value_tol;
  std::optional<std::vector<double>> delta_values;
};

struct ProblemFile {
  kkt::MinimaxProblem problem;
  expr::Point candidate;
  std::optional<oracle::Box> box;
  OptionOverrides options;
  std::string source_text;  // raw bytes, feeds the input digest
};

// Strict parse: unknown fields anywhere are a ValidationError, expression
// syntax errors surface as SyntaxError, an infeasible or misshapen candidate
// is a ValidationError.
ProblemFile parse_problem_text(const std::string& text);
ProblemFile load_problem(const std::string& path);

// FNV-1a (64-bit) over the raw file bytes, as 16 lowercase hex digits.
std::string input_digest(const std::string& bytes);

// Report mirrors. Non-finite doubles are encoded as the strings
// "inf"/"-inf"/"nan" because JSON numbers cannot carry them; the *_from_json
// readers reverse that encoding, so emit/parse round-trips exactly.
nlohmann::ordered_json to_json(const certify::CheckOutcome& c);
nlohmann::ordered_json to_json(const certify::CertificateReport& rep);
nlohmann::ordered_json to_json(const oracle::VerdictEvidence& v);
nlohmann::ordered_json to_json(const oracle::ClassificationReport& rep);
nlohmann::ordered_json to_json(const oracle::TauProfile& tp);
nlohmann::ordered_json to_json(const oracle::ArgmaxCalmness& ac);

certify::CertificateReport certificate_from_json(const nlohmann::json& j);
oracle::ClassificationReport classification_from_json(const nlohmann::json& j);
oracle::TauProfile tau_profile_from_json(const nlohmann::json& j);

}  // namespace mmcert::io
