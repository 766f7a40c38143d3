#pragma once

#include <optional>
#include <string>

#include "qkalman/analysis.hpp"

namespace qk {

// Raised on filesystem failures (unreadable spec, unwritable output).
class IOError : public std::runtime_error {
public:
  explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

// Parsed system description.  representation selects which matrices are
// meaningful: "complex" and "passive" use the annihilation-sector blocks,
// "real" uses the quadrature pair (H, C).
struct SystemSpecFile {
  std::string name;
  std::string description;
  std::string representation;  // "complex" | "passive" | "real"
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  ComplexMatrix omega_minus;  // n x n
  ComplexMatrix omega_plus;   // n x n     (complex only)
  ComplexMatrix c_minus;      // m x n
  ComplexMatrix c_plus;       // m x n     (complex only)
  RealMatrix h;               // 2n x 2n   (real only)
  RealMatrix c;               // 2m x 2n   (real only)
  StructureTolerance tol;     // spec-file overrides merged over the defaults
};

// Parses a JSON spec document; error messages carry the offending field
// path ("C_minus[0][1]").  Throws ValidationError.
SystemSpecFile parse_spec(const std::string& json_text);

// Reads the file and parses it; unreadable files raise IOError.
SystemSpecFile parse_spec_file(const std::string& path);

// Canonical JSON form of a spec; parse(emit(parse(x))) == parse(x).
std::string emit_spec(const SystemSpecFile& spec);

enum class ReportFormat { kJson, kText };

// Consistency data recorded when a passive spec is also pushed through the
// doubled-up pipeline.
struct PassiveCrossCheck {
  bool ran = false;
  bool ok = false;
  Eigen::Index n1 = 0, n2 = 0, n3 = 0;  // dimensions from the doubled-up path
  double df_angle = 0.0;                // principal-angle distance of the DF spans
};

struct DecompositionReport {
  SystemSpecFile spec;
  std::string input_checksum;  // fnv1a-64 of the canonical spec text
  bool symmetrized = false;    // Hermitian/symmetric parts were adjusted
  RealizabilityReport realizability;
  KalmanResult result;
  ModeClassification classification;
  BAEReport bae_p_to_q;
  BAEReport bae_q_to_p;
  SpecialCaseFlags flags;
  std::optional<PassiveDecomposition> passive;  // passive specs only
  PassiveCrossCheck cross_check;                // passive specs only
};

// Runs the full pipeline appropriate for the spec's representation.
// Passive specs run the annihilation-sector path and are re-run through the
// embedded doubled-up path as a cross-check.
DecompositionReport run_pipeline(const SystemSpecFile& spec);

// Renders a report; deterministic for fixed input.
std::string emit_report(const DecompositionReport& report, ReportFormat format);

// fnv1a-64 checksum in fixed-width hex, as used for input_checksum.
std::string fnv1a_hex(const std::string& data);

}  // namespace qk
