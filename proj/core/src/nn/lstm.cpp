#include "mdtlab/nn/lstm.hpp"

#include <cmath>
#include <string>

#include "mdtlab/error.hpp"

namespace mdtlab::nn {

namespace {

Vector sigmoid(const Vector& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

// Rows drawn from N(0, 1) and rescaled to L2 norm `scale`.
Matrix normalized_rows(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) *= scale / m.row(r).norm();
  return m;
}

void put(nlohmann::json& arrays, const std::string& name, const double* data, Eigen::Index n) {
  arrays[name] = std::vector<double>(data, data + n);
}

void get(const nlohmann::json& arrays, const std::string& name, double* data, Eigen::Index n) {
  if (!arrays.contains(name)) throw SchemaError("checkpoint: missing array '" + name + "'");
  const auto v = arrays.at(name).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != n)
    throw SchemaError("checkpoint: array '" + name + "' has " + std::to_string(v.size()) +
                      " values, expected " + std::to_string(n));
  std::copy(v.begin(), v.end(), data);
}

}  // namespace

LstmPolicyNet::LstmPolicyNet(int input_size, int hidden_size, Rng& rng)
    : input_size_(input_size), hidden_size_(hidden_size) {
  if (input_size <= 0 || hidden_size <= 0) throw ConfigError("lstm: sizes must be positive");
  const int H = hidden_size, D = input_size;
  w_.resize(4 * H, D + H);
  const double limit = std::sqrt(6.0 / (D + H + 4 * H));
  for (Eigen::Index k = 0; k < w_.size(); ++k) w_.data()[k] = rng.uniform(-limit, limit);
  b_ = Vector::Zero(4 * H);
  b_.segment(H, H).setOnes();
  w_pi_ = normalized_rows(2, H, 0.01, rng);
  b_pi_ = Vector::Zero(2);
  w_v_ = normalized_rows(1, H, 1.0, rng);
  b_v_ = Vector::Zero(1);
}

LstmPolicyNet::Step LstmPolicyNet::step(const Vector& x, const Vector& h, const Vector& c,
                                        Cache* cache) const {
  const int H = hidden_size_;
  if (x.size() != input_size_)
    throw ConfigError("lstm: expected input of size " + std::to_string(input_size_) + ", got " +
                      std::to_string(x.size()));
  if (h.size() != H || c.size() != H) throw ConfigError("lstm: recurrent state has the wrong size");
  Vector xh(input_size_ + H);
  xh << x, h;
  const Vector z = w_ * xh + b_;
  Vector i = sigmoid(z.segment(0, H));
  Vector f = sigmoid(z.segment(H, H));
  Vector g = z.segment(2 * H, H).array().tanh().matrix();
  Vector o = sigmoid(z.segment(3 * H, H));
  Step s;
  s.c = f.cwiseProduct(c) + i.cwiseProduct(g);
  Vector tanh_c = s.c.array().tanh().matrix();
  s.h = o.cwiseProduct(tanh_c);
  s.logits = w_pi_ * s.h + b_pi_;
  s.value = (w_v_ * s.h)(0) + b_v_(0);
  if (cache) {
    cache->xh = std::move(xh);
    cache->c_prev = c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c = s.c;
    cache->tanh_c = std::move(tanh_c);
    cache->h = s.h;
  }
  return s;
}

LstmPolicyNet::Gradients LstmPolicyNet::zero_gradients() const {
  return {Matrix::Zero(w_.rows(), w_.cols()), Vector::Zero(b_.size()),
          Matrix::Zero(2, hidden_size_),      Vector::Zero(2),
          Matrix::Zero(1, hidden_size_),      Vector::Zero(1)};
}

LstmPolicyNet::Gradients LstmPolicyNet::bptt(const std::vector<Cache>& caches,
                                             const std::vector<Vector>& dlogits,
                                             const std::vector<double>& dvalue) const {
  const int H = hidden_size_;
  const auto T = static_cast<Eigen::Index>(caches.size());
  if (dlogits.size() != caches.size() || dvalue.size() != caches.size())
    throw ProtocolError("lstm bptt: gradient and cache lengths differ");
  Gradients g = zero_gradients();
  if (T == 0) return g;

  Matrix dz_all(4 * H, T), xh_all(input_size_ + H, T), h_all(H, T), dl_all(2, T);
  Eigen::RowVectorXd dv_all(T);
  Vector dh_next = Vector::Zero(H), dc_next = Vector::Zero(H);
  for (Eigen::Index t = T; t-- > 0;) {
    const Cache& k = caches[t];
    const Vector dh = w_pi_.transpose() * dlogits[t] + w_v_.transpose() * dvalue[t] + dh_next;
    const Vector d_o = dh.cwiseProduct(k.tanh_c);
    const Vector dc =
        dh.cwiseProduct(k.o).cwiseProduct((1.0 - k.tanh_c.array().square()).matrix()) + dc_next;
    Vector dz(4 * H);
    dz.segment(0, H) = dc.cwiseProduct(k.g).array() * k.i.array() * (1.0 - k.i.array());
    dz.segment(H, H) = dc.cwiseProduct(k.c_prev).array() * k.f.array() * (1.0 - k.f.array());
    dz.segment(2 * H, H) = dc.cwiseProduct(k.i).array() * (1.0 - k.g.array().square());
    dz.segment(3 * H, H) = d_o.array() * k.o.array() * (1.0 - k.o.array());
    dc_next = dc.cwiseProduct(k.f);
    dh_next = (w_.transpose() * dz).tail(H);
    dz_all.col(t) = dz;
    xh_all.col(t) = k.xh;
    h_all.col(t) = k.h;
    dl_all.col(t) = dlogits[t];
    dv_all(t) = dvalue[t];
  }
  g.dw = dz_all * xh_all.transpose();
  g.db = dz_all.rowwise().sum();
  g.dw_pi = dl_all * h_all.transpose();
  g.db_pi = dl_all.rowwise().sum();
  g.dw_v = dv_all * h_all.transpose();
  g.db_v = Vector::Constant(1, dv_all.sum());
  return g;
}

std::size_t LstmPolicyNet::n_params() const {
  return w_.size() + b_.size() + w_pi_.size() + b_pi_.size() + w_v_.size() + b_v_.size();
}

namespace {

template <typename F>
void for_each_block(F&& f, auto&... blocks) {
  (f(blocks.data(), blocks.size()), ...);
}

}  // namespace

Vector LstmPolicyNet::flat() const {
  Vector v(n_params());
  Eigen::Index k = 0;
  for_each_block(
      [&](const double* p, Eigen::Index n) {
        v.segment(k, n) = Eigen::Map<const Vector>(p, n);
        k += n;
      },
      w_, b_, w_pi_, b_pi_, w_v_, b_v_);
  return v;
}

void LstmPolicyNet::set_flat(const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != n_params())
    throw ConfigError("lstm: flat parameter vector has the wrong size");
  Eigen::Index k = 0;
  for_each_block(
      [&](double* p, Eigen::Index n) {
        Eigen::Map<Vector>(p, n) = v.segment(k, n);
        k += n;
      },
      w_, b_, w_pi_, b_pi_, w_v_, b_v_);
}

Vector LstmPolicyNet::flatten(const Gradients& g) const {
  Vector v(n_params());
  Eigen::Index k = 0;
  for_each_block(
      [&](const double* p, Eigen::Index n) {
        v.segment(k, n) = Eigen::Map<const Vector>(p, n);
        k += n;
      },
      g.dw, g.db, g.dw_pi, g.db_pi, g.dw_v, g.db_v);
  return v;
}

nlohmann::json LstmPolicyNet::to_json() const {
  nlohmann::json arrays = nlohmann::json::object();
  put(arrays, "lstm.w", w_.data(), w_.size());
  put(arrays, "lstm.b", b_.data(), b_.size());
  put(arrays, "policy.w", w_pi_.data(), w_pi_.size());
  put(arrays, "policy.b", b_pi_.data(), b_pi_.size());
  put(arrays, "value.w", w_v_.data(), w_v_.size());
  put(arrays, "value.b", b_v_.data(), b_v_.size());
  return {{"input_size", input_size_}, {"hidden_size", hidden_size_}, {"arrays", arrays}};
}

void LstmPolicyNet::from_json(const nlohmann::json& j) {
  input_size_ = j.at("input_size").get<int>();
  hidden_size_ = j.at("hidden_size").get<int>();
  const int H = hidden_size_;
  w_.resize(4 * H, input_size_ + H);
  b_.resize(4 * H);
  w_pi_.resize(2, H);
  b_pi_.resize(2);
  w_v_.resize(1, H);
  b_v_.resize(1);
  const auto& a = j.at("arrays");
  get(a, "lstm.w", w_.data(), w_.size());
  get(a, "lstm.b", b_.data(), b_.size());
  get(a, "policy.w", w_pi_.data(), w_pi_.size());
  get(a, "policy.b", b_pi_.data(), b_pi_.size());
  get(a, "value.w", w_v_.data(), w_v_.size());
  get(a, "value.b", b_v_.data(), b_v_.size());
}

}  // namespace mdtlab::nn
