// SPDX-License-Identifier: Apache-2.0
// Dense feed-forward network with rectified-linear hidden layers and a
// linear output layer. Samples are stored as matrix columns.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace dpsim {

enum class Activation : std::uint8_t { Relu = 1 };

template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;  // layer l: out x in
  std::vector<Vector> biases;
  Activation activation = Activation::Relu;
  int ks = 0;
  std::uint64_t seed = 0;

  /// [in, hidden..., out]
  std::vector<int> dims() const;
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::size_t parameter_count() const;

  /// Throws InvalidArgument unless layer shapes chain.
  void validate() const;

  Matrix forward(const Matrix& x) const;

  template <typename To>
  Mlp<To> cast() const {
    Mlp<To> out;
    out.activation = activation;
    out.ks = ks;
    out.seed = seed;
    for (const auto& w : weights) out.weights.push_back(w.template cast<To>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<To>());
    return out;
  }
};

template <typename Scalar>
struct MlpGradient {
  std::vector<typename Mlp<Scalar>::Matrix> dw;
  std::vector<typename Mlp<Scalar>::Vector> db;

  static MlpGradient zeros_like(const Mlp<Scalar>& net);
  void set_zero();
  MlpGradient& operator+=(const MlpGradient& other);
};

/// Uniform(-a, a) weights with a = 1 / sqrt(fan_in), zero biases.
template <typename Scalar>
Mlp<Scalar> init_mlp_dims(const std::vector<int>& dims, std::uint64_t seed);

/// Sum of squared errors of forward(x) against y. Adds the gradient of
/// scale * SSE to `grad`.
template <typename Scalar>
double accumulate_sse_gradient(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x,
                               const typename Mlp<Scalar>::Matrix& y, Scalar scale, MlpGradient<Scalar>& grad);

/// Mean squared error over every output element.
template <typename Scalar>
double mse_loss(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x, const typename Mlp<Scalar>::Matrix& y);

/// Largest relative error between analytic gradients of the mean squared
/// error and central differences with the given step, over all parameters.
/// The denominator is max(|analytic|, |numeric|, 1e-6).
double gradient_check(const Mlp<double>& net, const Mlp<double>::Matrix& x, const Mlp<double>::Matrix& y,
                      double step = 1e-5);

struct AdamState {
  std::vector<Eigen::ArrayXXf> m_w, v_w;
  std::vector<Eigen::ArrayXf> m_b, v_b;
  std::uint64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState for_net(const Mlp<float>& net);
  void step(Mlp<float>& net, const MlpGradient<float>& grad, double lr);
};

extern template struct Mlp<float>;
extern template struct Mlp<double>;
extern template struct MlpGradient<float>;
extern template struct MlpGradient<double>;

}  // namespace dpsim
