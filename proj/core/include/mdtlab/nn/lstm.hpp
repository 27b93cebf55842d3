#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/nn/tensor.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::nn {

// LSTM cell with a linear policy head (2 logits) and a linear value head.
// Gate rows of `w` are ordered input, forget, candidate, output; columns are
// [x ; h_prev].
class LstmPolicyNet {
 public:
  struct Step {
    Vector h, c;
    Vector logits;  // size 2
    double value = 0.0;
  };

  struct Cache {
    Vector xh;      // [x ; h_prev]
    Vector c_prev;
    Vector i, f, g, o;
    Vector c, tanh_c, h;
  };

  struct Gradients {
    Matrix dw;
    Vector db;
    Matrix dw_pi;
    Vector db_pi;
    Matrix dw_v;
    Vector db_v;
  };

  LstmPolicyNet() = default;
  LstmPolicyNet(int input_size, int hidden_size, Rng& rng);

  int input_size() const { return input_size_; }
  int hidden_size() const { return hidden_size_; }

  Step step(const Vector& x, const Vector& h, const Vector& c, Cache* cache = nullptr) const;

  // Backpropagation through time. dlogits[t] and dvalue[t] are loss
  // gradients w.r.t. the head outputs at step t; the initial state is a
  // constant.
  Gradients bptt(const std::vector<Cache>& caches, const std::vector<Vector>& dlogits,
                 const std::vector<double>& dvalue) const;

  Gradients zero_gradients() const;
  std::size_t n_params() const;
  Vector flat() const;
  void set_flat(const Vector& v);
  Vector flatten(const Gradients& g) const;

  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& arrays);

  Matrix& w() { return w_; }
  Vector& b() { return b_; }
  Matrix& w_pi() { return w_pi_; }
  Vector& b_pi() { return b_pi_; }
  Matrix& w_v() { return w_v_; }
  Vector& b_v() { return b_v_; }

  bool operator==(const LstmPolicyNet& o) const { return flat() == o.flat(); }

 private:
  int input_size_ = 0;
  int hidden_size_ = 0;
  Matrix w_;
  Vector b_;
  Matrix w_pi_;
  Vector b_pi_;
  Matrix w_v_;
  Vector b_v_;
};

}  // namespace mdtlab::nn
