#include "mdtlab/arbitration/arbitrator.hpp"

#include <algorithm>
#include <cmath>

namespace mdtlab::arbitration {

namespace {

double mf_to_mb_rate(const ArbitrationParams& p, double rel_mf) {
  return p.a_alpha / (1.0 + std::exp(p.b_alpha * rel_mf));
}

double mb_to_mf_rate(const ArbitrationParams& p, double rel_mb) {
  return p.a_beta / (1.0 + std::exp(p.b_beta * rel_mb));
}

}  // namespace

ArbitrationState arbitration_step(const ArbitrationState& st, double rel_mb, double rel_mf) {
  ArbitrationState next = st;
  next.rel_mb = std::clamp(rel_mb, 0.0, 1.0);
  next.rel_mf = std::clamp(rel_mf, 0.0, 1.0);
  const double alpha = mf_to_mb_rate(st.params, next.rel_mf);
  const double beta = mb_to_mf_rate(st.params, next.rel_mb);
  next.p_mb = std::clamp(st.p_mb + alpha * (1.0 - st.p_mb) - beta * st.p_mb, 0.0, 1.0);
  return next;
}

double arbitration_fixed_point(const ArbitrationParams& p, double rel_mb, double rel_mf) {
  const double alpha = mf_to_mb_rate(p, rel_mf);
  const double beta = mb_to_mf_rate(p, rel_mb);
  return alpha / (alpha + beta);
}

rl::ActionValues combine_q(double w, const rl::ActionValues& q_mb, const rl::ActionValues& q_mf) {
  return {w * q_mb[0] + (1.0 - w) * q_mf[0], w * q_mb[1] + (1.0 - w) * q_mf[1]};
}

}  // namespace mdtlab::arbitration
