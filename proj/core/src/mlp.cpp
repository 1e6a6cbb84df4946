// SPDX-License-Identifier: Apache-2.0
#include "dpsim/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dpsim/error.hpp"

namespace dpsim {

template <typename Scalar>
std::vector<int> Mlp<Scalar>::dims() const {
  std::vector<int> d;
  if (weights.empty()) return d;
  d.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) d.push_back(static_cast<int>(w.rows()));
  return d;
}

template <typename Scalar>
std::size_t Mlp<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

template <typename Scalar>
void Mlp<Scalar>::validate() const {
  if (weights.empty()) throw InvalidArgument("network has no layers");
  if (weights.size() != biases.size()) throw InvalidArgument("weight and bias counts differ");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() < 1 || weights[l].cols() < 1) throw InvalidArgument("empty layer");
    if (biases[l].size() != weights[l].rows()) throw InvalidArgument("bias length does not match layer width");
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) throw InvalidArgument("layer dims do not chain");
  }
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& x) const {
  if (x.rows() != input_dim()) throw InvalidArgument("input width does not match network");
  Matrix a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix z = weights[l] * a;
    z.colwise() += biases[l];
    if (l + 1 < weights.size()) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
  }
  return a;
}

template <typename Scalar>
MlpGradient<Scalar> MlpGradient<Scalar>::zeros_like(const Mlp<Scalar>& net) {
  MlpGradient g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.dw.push_back(Mlp<Scalar>::Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.db.push_back(Mlp<Scalar>::Vector::Zero(net.biases[l].size()));
  }
  return g;
}

template <typename Scalar>
void MlpGradient<Scalar>::set_zero() {
  for (auto& m : dw) m.setZero();
  for (auto& v : db) v.setZero();
}

template <typename Scalar>
MlpGradient<Scalar>& MlpGradient<Scalar>::operator+=(const MlpGradient& other) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] += other.dw[l];
    db[l] += other.db[l];
  }
  return *this;
}

template <typename Scalar>
Mlp<Scalar> init_mlp_dims(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidArgument("network needs at least two dims");
  for (int d : dims)
    if (d < 1) throw InvalidArgument("layer width must be positive");
  Mlp<Scalar> net;
  net.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double a = 1.0 / std::sqrt(static_cast<double>(in));
    typename Mlp<Scalar>::Matrix w(out, in);
    // Row-major fill order so the draw sequence matches the file layout.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w(r, c) = static_cast<Scalar>((2.0 * u - 1.0) * a);
      }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Mlp<Scalar>::Vector::Zero(out));
  }
  return net;
}

template <typename Scalar>
double accumulate_sse_gradient(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x,
                               const typename Mlp<Scalar>::Matrix& y, Scalar scale, MlpGradient<Scalar>& grad) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  const std::size_t L = net.weights.size();
  if (x.rows() != net.input_dim() || y.rows() != net.output_dim() || x.cols() != y.cols())
    throw InvalidArgument("batch shape does not match network");

  std::vector<Matrix> acts;  // acts[0] = x, acts[l+1] = output of layer l
  acts.reserve(L + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = net.weights[l] * acts.back();
    z.colwise() += net.biases[l];
    if (l + 1 < L) z = z.cwiseMax(Scalar(0));
    acts.push_back(std::move(z));
  }

  Matrix delta = acts.back() - y;
  const double sse = static_cast<double>(delta.squaredNorm());
  delta *= Scalar(2) * scale;
  for (std::size_t l = L; l-- > 0;) {
    grad.dw[l].noalias() += delta * acts[l].transpose();
    grad.db[l] += delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = net.weights[l].transpose() * delta;
    // ReLU derivative taken from the post-activation: zero where clamped.
    delta = (acts[l].array() > Scalar(0)).select(back, Scalar(0));
  }
  return sse;
}

template <typename Scalar>
double mse_loss(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x, const typename Mlp<Scalar>::Matrix& y) {
  const auto out = net.forward(x);
  if (out.rows() != y.rows() || out.cols() != y.cols()) throw InvalidArgument("target shape does not match network");
  return static_cast<double>((out - y).squaredNorm()) / static_cast<double>(y.size());
}

double gradient_check(const Mlp<double>& net, const Mlp<double>::Matrix& x, const Mlp<double>::Matrix& y,
                      double step) {
  auto grad = MlpGradient<double>::zeros_like(net);
  accumulate_sse_gradient(net, x, y, 1.0 / static_cast<double>(y.size()), grad);

  Mlp<double> probe = net;
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + step;
    const double up = mse_loss(probe, x, y);
    param = saved - step;
    const double down = mse_loss(probe, x, y);
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c)
      for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) check(probe.weights[l](r, c), grad.dw[l](r, c));
    for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r) check(probe.biases[l](r), grad.db[l](r));
  }
  return worst;
}

AdamState AdamState::for_net(const Mlp<float>& net) {
  AdamState s;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    s.m_w.push_back(Eigen::ArrayXXf::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.v_w.push_back(Eigen::ArrayXXf::Zero(net.weights[l].rows(), net.weights[l].cols()));
    s.m_b.push_back(Eigen::ArrayXf::Zero(net.biases[l].size()));
    s.v_b.push_back(Eigen::ArrayXf::Zero(net.biases[l].size()));
  }
  return s;
}

void AdamState::step(Mlp<float>& net, const MlpGradient<float>& grad, double lr) {
  ++t;
  const auto b1 = static_cast<float>(beta1), b2 = static_cast<float>(beta2);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  // Bias corrections folded into the step size and epsilon.
  const auto alpha = static_cast<float>(lr * std::sqrt(c2) / c1);
  const auto e = static_cast<float>(eps * std::sqrt(c2));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    param -= alpha * (m / (v.sqrt() + e));
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto pw = net.weights[l].array();
    update(pw, m_w[l], v_w[l], grad.dw[l].array());
    auto pb = net.biases[l].array();
    update(pb, m_b[l], v_b[l], grad.db[l].array());
  }
}

template struct Mlp<float>;
template struct Mlp<double>;
template struct MlpGradient<float>;
template struct MlpGradient<double>;
template Mlp<float> init_mlp_dims<float>(const std::vector<int>&, std::uint64_t);
template Mlp<double> init_mlp_dims<double>(const std::vector<int>&, std::uint64_t);
template double accumulate_sse_gradient<float>(const Mlp<float>&, const Mlp<float>::Matrix&, const Mlp<float>::Matrix&,
                                               float, MlpGradient<float>&);
template double accumulate_sse_gradient<double>(const Mlp<double>&, const Mlp<double>::Matrix&,
                                                const Mlp<double>::Matrix&, double, MlpGradient<double>&);
template double mse_loss<float>(const Mlp<float>&, const Mlp<float>::Matrix&, const Mlp<float>::Matrix&);
template double mse_loss<double>(const Mlp<double>&, const Mlp<double>::Matrix&, const Mlp<double>::Matrix&);

}  // namespace dpsim
