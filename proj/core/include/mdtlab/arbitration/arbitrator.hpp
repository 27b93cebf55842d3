#pragma once

#include "mdtlab/rl/observation.hpp"

namespace mdtlab::arbitration {

struct ArbitrationParams {
  double a_alpha = 1.0;   // max MF -> MB transition rate
  double a_beta = 1.0;    // max MB -> MF transition rate
  double b_alpha = 10.0;  // steepness in MF reliability
  double b_beta = 10.0;   // steepness in MB reliability
  bool operator==(const ArbitrationParams&) const = default;
};

struct ArbitrationState {
  double rel_mb = 1.0 / 3.0;
  double rel_mf = 1.0 / 3.0;
  double p_mb = 0.5;  // arbitration weight w
  ArbitrationParams params;
};

// Two-state rate dynamics:
//   alpha = A_alpha / (1 + exp(B_alpha * rel_mf))   (MF -> MB)
//   beta  = A_beta  / (1 + exp(B_beta  * rel_mb))   (MB -> MF)
//   w    <- clamp(w + alpha (1 - w) - beta w, 0, 1)
ArbitrationState arbitration_step(const ArbitrationState& st, double rel_mb, double rel_mf);

// Fixed point alpha / (alpha + beta) for constant reliabilities.
double arbitration_fixed_point(const ArbitrationParams& p, double rel_mb, double rel_mf);

// w * q_mb + (1 - w) * q_mf, elementwise.
rl::ActionValues combine_q(double w, const rl::ActionValues& q_mb, const rl::ActionValues& q_mf);

}  // namespace mdtlab::arbitration
