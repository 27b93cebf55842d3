#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "mdtlab/nn/tensor.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::nn {

// Fully connected network with ReLU hidden layers and a linear output layer.
// Inputs are column batches: x is (in x batch).
class DenseNet {
 public:
  struct Layer {
    Matrix w;  // out x in
    Vector b;
  };

  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
  };

  struct Gradients {
    std::vector<Matrix> dw;
    std::vector<Vector> db;
    Matrix dx;
  };

  DenseNet() = default;
  // He-uniform weights, zero biases.
  DenseNet(std::vector<int> sizes, Rng& rng);

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  Vector forward(const Vector& x) const;
  Gradients backward(const Cache& cache, const Matrix& dy) const;

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t n_params() const;
  Vector flat() const;
  void set_flat(const Vector& v);
  Vector flatten(const Gradients& g) const;

  nlohmann::json to_json(const std::string& prefix) const;
  void from_json(const nlohmann::json& arrays, const std::string& prefix);

  bool operator==(const DenseNet& o) const;

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

}  // namespace mdtlab::nn
