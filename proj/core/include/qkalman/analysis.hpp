#pragma once

#include "qkalman/decomposition.hpp"

namespace qk {

// Labels and structural residuals attached to the canonical variables.
struct ModeClassification {
  std::vector<std::string> df_modes;       // decoherence-free quadratures
  std::vector<std::string> qnd_variables;  // the p_h components
  std::vector<std::pair<std::string, std::string>> conjugate_pairs;  // (q_h, p_h)
  Eigen::Index qmfs_dim = 0;  // dimension of the span of the p_h variables
  // Max entry of the p_h rows of the canonical A outside their own block and
  // of the p_h rows of the canonical B; both must vanish for the p_h span to
  // evolve autonomously and noiselessly.
  double qnd_dynamics_residual = 0.0;
  double qnd_input_residual = 0.0;
  bool qnd_structure_ok = false;
};

ModeClassification classify_modes(const KalmanResult& r);

// Back-action evasion is checked per transfer direction on the
// controllable-observable subsystem (quadrature picture, m channels,
// inputs ordered (q_in, p_in), outputs (q_out, p_out)).
enum class BAEDirection {
  kPinToQout,  // p inputs must not reach q outputs
  kQinToPout,  // q inputs must not reach p outputs
};

struct BAEReport {
  BAEDirection direction = BAEDirection::kPinToQout;
  bool verdict = false;
  double markov_residual = 0.0;    // max |C_sel A_co^k B_sel| over k < 2 n1
  double transfer_residual = 0.0;  // max |Xi quadrant| over the sample points
};

BAEReport bae_check(const KalmanResult& r, BAEDirection direction,
                    double zero_tol = 1e-9);

// Remark-level Markov identity of the split sector: the couplings into and
// out of the h block never feed through its free dynamics,
// [A_21; A_31] A_h^k [A_12  A_13] = 0 for k < 2 n3.  Returns the max residual.
double h_markov_residual(const KalmanResult& r);

// Structural special cases detected from the input system, each paired with
// the canonical-form consequence it implies.  When a flag holds but its
// consequence fails at the tolerance, consistent is false and report carries
// the residuals.
struct SpecialCaseFlags {
  // Hamiltonian maps the unobservable space into itself; implies the split
  // sector decouples from the decoherence-free one (A_13 = A_31 = 0).
  bool hamiltonian_preserves_unobservable = false;
  double a13_residual = 0.0;
  double a31_residual = 0.0;
  // Coupling rows are orthogonal to the controllable space's complement in
  // the split-sector sense; implies the h sector is dark (B_h = C_h = 0).
  bool coupling_avoids_h_sector = false;
  double bh_residual = 0.0;
  double ch_residual = 0.0;
  bool consistent = true;
  std::string report;
};

SpecialCaseFlags special_case_flags(const QLSystem& sys, const KalmanResult& r);

}  // namespace qk
