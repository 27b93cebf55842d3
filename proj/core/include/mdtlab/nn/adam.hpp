#pragma once

#include <nlohmann/json.hpp>

#include "mdtlab/nn/tensor.hpp"

namespace mdtlab::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n_params, AdamOptions options);

  void step(Vector& params, const Vector& grad);

  const AdamOptions& options() const { return opt_; }
  long steps() const { return t_; }
  const Vector& m() const { return m_; }
  const Vector& v() const { return v_; }

  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  AdamOptions opt_;
  Vector m_, v_;
  long t_ = 0;
};

// Scales grad in place so its L2 norm is at most max_norm; returns the
// original norm.
double clip_by_global_norm(Vector& grad, double max_norm);

}  // namespace mdtlab::nn
