#pragma once

#include "monge/error.hpp"
#include "monge/nn/tensor.hpp"
#include "monge/rng.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace monge::nn {

enum class Activation : std::uint8_t { kPReLU = 0, kTanh = 1, kReLU = 2 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kPReLU: return "prelu";
    case Activation::kTanh: return "tanh";
    case Activation::kReLU: return "relu";
  }
  return "?";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "prelu") return Activation::kPReLU;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kReLU;
  throw Error(ErrorCode::kParse, "unknown activation '" + std::string(name) + "'");
}

/// Fully connected network. With `residual` the output is
/// input + F(input) on the first `input_dim` columns.
struct NetworkSpec {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden_dims;
  Activation activation = Activation::kPReLU;
  bool residual = false;
  double dropout_p = 0.0;
  int condition_dim = 0;  // one-hot label block appended to the input

  int total_input() const { return input_dim + condition_dim; }

  void validate() const {
    require(input_dim >= 1 && output_dim >= 1, ErrorCode::kInvalidArgument, "network dims must be positive");
    require(condition_dim >= 0, ErrorCode::kInvalidArgument, "condition_dim must be >= 0");
    for (int h : hidden_dims) require(h >= 1, ErrorCode::kInvalidArgument, "hidden widths must be positive");
    require(!residual || input_dim == output_dim, ErrorCode::kInvalidArgument,
            "residual network needs input_dim == output_dim");
    require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorCode::kInvalidArgument, "dropout_p must be in [0,1)");
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Flat parameter state of a network.
using ParamVector = Vector;

struct LayerLayout {
  int in = 0;
  int out = 0;
  std::size_t weight = 0;  // out x in, row-major
  std::size_t bias = 0;
  bool hidden = false;     // followed by activation (and dropout)
  std::size_t slope = 0;   // PReLU slope offset, valid when hidden && PReLU
};

inline std::vector<LayerLayout> layout(const NetworkSpec& spec) {
  std::vector<LayerLayout> layers;
  std::size_t offset = 0;
  int in = spec.total_input();
  auto push = [&](int out, bool hidden) {
    LayerLayout l;
    l.in = in;
    l.out = out;
    l.hidden = hidden;
    l.weight = offset;
    offset += static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
    l.bias = offset;
    offset += static_cast<std::size_t>(out);
    if (hidden && spec.activation == Activation::kPReLU) l.slope = offset++;
    layers.push_back(l);
    in = out;
  };
  for (int h : spec.hidden_dims) push(h, true);
  push(spec.output_dim, false);
  return layers;
}

inline std::size_t param_count(const NetworkSpec& spec) {
  const auto layers = layout(spec);
  const auto& last = layers.back();
  return last.bias + static_cast<std::size_t>(last.out);
}

/// Scaled-uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in));
/// PReLU slopes start at 0.25.
inline ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p(static_cast<Eigen::Index>(param_count(spec)));
  std::mt19937_64 engine(hash_keys({seed, 0x1417ull}));
  for (const auto& l : layout(spec)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t n = static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out) + l.out;
    for (std::size_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(l.weight + i)] = u(engine);
    if (l.hidden && spec.activation == Activation::kPReLU) p[static_cast<Eigen::Index>(l.slope)] = 0.25;
  }
  return p;
}

struct ForwardMode {
  bool train = false;
  std::uint64_t rng_seed = 0;
  std::uint64_t step = 0;
};

/// Intermediate values recorded by a forward pass, replayed by backward.
struct Tape {
  Tensor input;
  std::vector<Tensor> layer_inputs;
  std::vector<Tensor> pre_activations;
  std::vector<Tensor> dropout_scale;  // empty tensor when no dropout applied
};

struct Gradients {
  ParamVector params;
  Tensor input;  // B x total_input()
};

namespace detail {

using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline ConstMatMap weights(const ParamVector& p, const LayerLayout& l) {
  return ConstMatMap(p.data() + l.weight, l.out, l.in);
}

inline Eigen::Map<const Eigen::RowVectorXd> bias(const ParamVector& p, const LayerLayout& l) {
  return Eigen::Map<const Eigen::RowVectorXd>(p.data() + l.bias, l.out);
}

inline void activate(const NetworkSpec& spec, const ParamVector& p, const LayerLayout& l, Tensor& z) {
  switch (spec.activation) {
    case Activation::kPReLU: {
      const double a = p[static_cast<Eigen::Index>(l.slope)];
      z = z.unaryExpr([a](double v) { return v >= 0.0 ? v : a * v; });
      break;
    }
    case Activation::kTanh: z = z.array().tanh().matrix(); break;
    case Activation::kReLU: z = z.cwiseMax(0.0); break;
  }
}

inline Tensor dropout_mask(const NetworkSpec& spec, const ForwardMode& mode, std::size_t layer, Eigen::Index rows,
                           Eigen::Index cols) {
  const std::uint64_t base = hash_keys({mode.rng_seed, mode.step, layer});
  const double keep_scale = 1.0 / (1.0 - spec.dropout_p);
  Tensor mask(rows, cols);
  double* m = mask.data();
  const Eigen::Index n = rows * cols;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = static_cast<double>(mix64(base + static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
    m[i] = u < spec.dropout_p ? 0.0 : keep_scale;
  }
  return mask;
}

}  // namespace detail

/// Evaluates the network on a B x total_input() batch. Dropout is active only in
/// train mode and is a pure function of (rng_seed, step, layer, element).
inline Tensor forward(const NetworkSpec& spec, const ParamVector& params, const Tensor& input,
                      const ForwardMode& mode = {}, Tape* tape = nullptr) {
  require(input.cols() == spec.total_input(), ErrorCode::kDimensionMismatch,
          "network input has " + std::to_string(input.cols()) + " columns, expected " +
              std::to_string(spec.total_input()));
  require(static_cast<std::size_t>(params.size()) == param_count(spec), ErrorCode::kDimensionMismatch,
          "parameter vector length does not match network layout");
  const auto layers = layout(spec);
  const bool use_dropout = mode.train && spec.dropout_p > 0.0;
  if (tape) {
    tape->input = input;
    tape->layer_inputs.clear();
    tape->pre_activations.clear();
    tape->dropout_scale.clear();
  }
  Tensor h = input;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    Tensor z = h * detail::weights(params, l).transpose();
    z.rowwise() += detail::bias(params, l);
    if (tape) {
      tape->layer_inputs.push_back(h);
      tape->pre_activations.push_back(z);
    }
    if (l.hidden) {
      detail::activate(spec, params, l, z);
      if (use_dropout) {
        Tensor mask = detail::dropout_mask(spec, mode, li, z.rows(), z.cols());
        z = z.cwiseProduct(mask);
        if (tape) tape->dropout_scale.push_back(std::move(mask));
      } else if (tape) {
        tape->dropout_scale.emplace_back();
      }
    } else if (tape) {
      tape->dropout_scale.emplace_back();
    }
    h = std::move(z);
  }
  if (spec.residual) h += input.leftCols(spec.input_dim);
  return h;
}

/// Reverse-mode gradients of <upstream, forward(input)> from a recorded tape.
inline Gradients backward(const NetworkSpec& spec, const ParamVector& params, const Tape& tape,
                          const Tensor& upstream) {
  require(upstream.rows() == tape.input.rows() && upstream.cols() == spec.output_dim,
          ErrorCode::kDimensionMismatch, "upstream gradient shape does not match network output");
  const auto layers = layout(spec);
  Gradients g;
  g.params = ParamVector::Zero(params.size());
  Tensor grad = upstream;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    const Tensor& z = tape.pre_activations[k];
    if (l.hidden) {
      if (tape.dropout_scale[k].size() > 0) grad = grad.cwiseProduct(tape.dropout_scale[k]);
      switch (spec.activation) {
        case Activation::kPReLU: {
          const double a = params[static_cast<Eigen::Index>(l.slope)];
          double slope_grad = 0.0;
          for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double zi = z.data()[i];
            if (zi < 0.0) {
              slope_grad += grad.data()[i] * zi;
              grad.data()[i] *= a;
            }
          }
          g.params[static_cast<Eigen::Index>(l.slope)] = slope_grad;
          break;
        }
        case Activation::kTanh:
          grad = grad.cwiseProduct((1.0 - z.array().tanh().square()).matrix());
          break;
        case Activation::kReLU:
          grad = grad.cwiseProduct(z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
          break;
      }
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dw(
        g.params.data() + l.weight, l.out, l.in);
    dw.noalias() = grad.transpose() * tape.layer_inputs[k];
    Eigen::Map<Eigen::RowVectorXd>(g.params.data() + l.bias, l.out) = grad.colwise().sum();
    grad = grad * detail::weights(params, l);
  }
  g.input = std::move(grad);
  if (spec.residual) g.input.leftCols(spec.input_dim) += upstream;
  return g;
}

/// Convenience form that replays the forward pass (same mode, hence same dropout mask).
inline Gradients backward(const NetworkSpec& spec, const ParamVector& params, const Tensor& input,
                          const Tensor& upstream, const ForwardMode& mode = {}) {
  Tape tape;
  forward(spec, params, input, mode, &tape);
  return backward(spec, params, tape, upstream);
}

/// A network spec together with its parameters.
struct Model {
  NetworkSpec spec;
  ParamVector params;

  Tensor operator()(const Tensor& input, const ForwardMode& mode = {}) const {
    return forward(spec, params, input, mode);
  }
};

}  // namespace monge::nn
