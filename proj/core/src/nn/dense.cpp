#include "mdtlab/nn/dense.hpp"

#include <cmath>
#include <string>

#include "mdtlab/error.hpp"

namespace mdtlab::nn {

namespace {

void put_matrix(nlohmann::json& arrays, nlohmann::json& shapes, const std::string& name,
                const Matrix& m) {
  arrays[name] = std::vector<double>(m.data(), m.data() + m.size());
  shapes[name] = {m.rows(), m.cols()};
}

Matrix get_matrix(const nlohmann::json& arrays, const std::string& name, Eigen::Index rows,
                  Eigen::Index cols) {
  if (!arrays.contains(name)) throw SchemaError("checkpoint: missing array '" + name + "'");
  auto v = arrays.at(name).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != rows * cols)
    throw SchemaError("checkpoint: array '" + name + "' has " + std::to_string(v.size()) +
                      " values, expected " + std::to_string(rows * cols));
  return Eigen::Map<Matrix>(v.data(), rows, cols);
}

}  // namespace

DenseNet::DenseNet(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("dense net needs at least an input and an output size");
  for (int s : sizes_)
    if (s <= 0) throw ConfigError("dense net layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / in);
    Layer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index k = 0; k < layer.w.size(); ++k) layer.w.data()[k] = rng.uniform(-limit, limit);
    layers_.push_back(std::move(layer));
  }
}

Matrix DenseNet::forward(const Matrix& x, Cache* cache) const {
  if (layers_.empty()) throw ConfigError("dense net is empty");
  if (x.rows() != sizes_.front())
    throw ConfigError("dense layer 0: expected input of size " + std::to_string(sizes_.front()) +
                      ", got " + std::to_string(x.rows()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].w * a;
    z.colwise() += layers_[l].b;
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    a = l + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Vector DenseNet::forward(const Vector& x) const {
  Matrix m = forward(Matrix(Eigen::Map<const Matrix>(x.data(), x.size(), 1)));
  return Eigen::Map<const Vector>(m.data(), m.rows());
}

DenseNet::Gradients DenseNet::backward(const Cache& cache, const Matrix& dy) const {
  const std::size_t n = layers_.size();
  if (cache.inputs.size() != n) throw ProtocolError("dense backward: cache does not match the network");
  Gradients g;
  g.dw.resize(n);
  g.db.resize(n);
  Matrix delta = dy;
  for (std::size_t l = n; l-- > 0;) {
    if (l + 1 < n) delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    g.dw[l] = delta * cache.inputs[l].transpose();
    g.db[l] = delta.rowwise().sum();
    delta = layers_[l].w.transpose() * delta;
  }
  g.dx = std::move(delta);
  return g;
}

std::size_t DenseNet::n_params() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

Vector DenseNet::flat() const {
  Vector v(n_params());
  Eigen::Index k = 0;
  for (const auto& l : layers_) {
    v.segment(k, l.w.size()) = Eigen::Map<const Vector>(l.w.data(), l.w.size());
    k += l.w.size();
    v.segment(k, l.b.size()) = l.b;
    k += l.b.size();
  }
  return v;
}

void DenseNet::set_flat(const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != n_params())
    throw ConfigError("dense net: flat parameter vector has the wrong size");
  Eigen::Index k = 0;
  for (auto& l : layers_) {
    Eigen::Map<Vector>(l.w.data(), l.w.size()) = v.segment(k, l.w.size());
    k += l.w.size();
    l.b = v.segment(k, l.b.size());
    k += l.b.size();
  }
}

Vector DenseNet::flatten(const Gradients& g) const {
  Vector v(n_params());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    v.segment(k, g.dw[l].size()) = Eigen::Map<const Vector>(g.dw[l].data(), g.dw[l].size());
    k += g.dw[l].size();
    v.segment(k, g.db[l].size()) = g.db[l];
    k += g.db[l].size();
  }
  return v;
}

nlohmann::json DenseNet::to_json(const std::string& prefix) const {
  nlohmann::json arrays = nlohmann::json::object(), shapes = nlohmann::json::object();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    put_matrix(arrays, shapes, base + ".w", layers_[l].w);
    put_matrix(arrays, shapes, base + ".b", Matrix(layers_[l].b));
  }
  return {{"sizes", sizes_}, {"arrays", arrays}, {"shapes", shapes}};
}

void DenseNet::from_json(const nlohmann::json& j, const std::string& prefix) {
  sizes_ = j.at("sizes").get<std::vector<int>>();
  layers_.clear();
  const auto& arrays = j.at("arrays");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    Layer layer;
    layer.w = get_matrix(arrays, base + ".w", sizes_[l + 1], sizes_[l]);
    Matrix b = get_matrix(arrays, base + ".b", sizes_[l + 1], 1);
    layer.b = Eigen::Map<Vector>(b.data(), b.rows());
    layers_.push_back(std::move(layer));
  }
}

bool DenseNet::operator==(const DenseNet& o) const {
  return sizes_ == o.sizes_ && flat() == o.flat();
}

}  // namespace mdtlab::nn
