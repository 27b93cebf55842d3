#include "mdtlab/nn/adam.hpp"

#include <cmath>

#include "mdtlab/error.hpp"

namespace mdtlab::nn {

Adam::Adam(std::size_t n_params, AdamOptions options)
    : opt_(options), m_(Vector::Zero(n_params)), v_(Vector::Zero(n_params)) {
  if (!(opt_.learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be positive");
}

void Adam::step(Vector& params, const Vector& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ConfigError("adam: parameter and gradient sizes must match the optimizer");
  ++t_;
  m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grad;
  v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  params.array() -= opt_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opt_.epsilon);
}

nlohmann::json Adam::to_json() const {
  return {{"learning_rate", opt_.learning_rate}, {"beta1", opt_.beta1}, {"beta2", opt_.beta2},
          {"epsilon", opt_.epsilon}, {"t", t_}, {"m", to_std(m_)}, {"v", to_std(v_)}};
}

void Adam::from_json(const nlohmann::json& j) {
  opt_.learning_rate = j.at("learning_rate").get<double>();
  opt_.beta1 = j.at("beta1").get<double>();
  opt_.beta2 = j.at("beta2").get<double>();
  opt_.epsilon = j.at("epsilon").get<double>();
  t_ = j.at("t").get<long>();
  m_ = from_std(j.at("m").get<std::vector<double>>());
  v_ = from_std(j.at("v").get<std::vector<double>>());
}

double clip_by_global_norm(Vector& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

}  // namespace mdtlab::nn
