#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fallpred/nn/loss.hpp"

namespace fallpred::nn {

enum class OutputActivation { none, sigmoid };

/// The sigmoid head is scaled by the largest double below 1, so its output
/// lies in [0,1) even where the sigmoid itself rounds to 1.
inline constexpr double kUnitScale = 1.0 - 0x1p-53;

/// Conv1d(filters, kernel, stride) -> ReLU -> MaxPool(pool) -> Flatten ->
/// Dense(hidden) -> ReLU -> Dense(outputs). Input is a window of
/// `window_length` time steps by `channels` features, row-major.
struct NetworkSpec {
  std::size_t window_length = 30;
  std::size_t channels = 8;
  std::size_t filters = 8;
  std::size_t kernel = 5;
  std::size_t stride = 1;
  std::size_t pool = 2;
  std::size_t hidden = 32;
  std::size_t outputs = 1;
  OutputActivation output = OutputActivation::none;

  std::size_t conv_length() const { return (window_length - kernel) / stride + 1; }
  std::size_t pooled_length() const { return conv_length() / pool; }
  std::size_t flat_size() const { return pooled_length() * filters; }
  std::size_t input_size() const { return window_length * channels; }

  /// Throws ModelError naming the first layer whose shape does not compose.
  void validate() const;
  /// Canonical text form; its FNV-1a hash identifies the architecture.
  std::string describe() const;
  std::uint64_t hash() const;

  bool operator==(const NetworkSpec&) const = default;
};

struct Tensor {
  std::string name;
  std::vector<double> values;
  bool frozen = false;  // skipped by the optimizer; gradients are still computed
};

/// Every trainable array of a network, in a fixed order:
/// conv.weight [F][k][d], conv.bias [F], fc1.weight [h][flat], fc1.bias [h],
/// fc2.weight [o][h], fc2.bias [o].
struct ParamSet {
  std::vector<Tensor> tensors;

  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  std::size_t count() const;
  /// Same layout, all values zero.
  ParamSet zeros_like() const;
  void fill(double v);
};

/// Intermediate values of one forward pass, reused by backward().
struct Workspace {
  std::vector<double> flipped;   // conv weights with the kernel reversed
  std::vector<double> conv_pre;  // [conv_length][F]
  std::vector<double> conv_act;
  std::vector<double> pooled;    // [pooled_length][F]
  std::vector<std::uint32_t> argmax;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_act;
  std::vector<double> logits;
  std::vector<double> output;
  // gradient scratch
  std::vector<double> d_output;
  std::vector<double> d_hidden;
  std::vector<double> d_flat;
  std::vector<double> d_conv;
  std::vector<double> d_flipped;
};

class Network {
 public:
  explicit Network(NetworkSpec spec);
  Network(NetworkSpec spec, ParamSet params);

  /// Uniform initialization in +-1/sqrt(fan_in).
  void initialize(std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  /// Network output for one window: logits, or sigmoid values for a sigmoid
  /// head. Reentrant for distinct workspaces.
  std::span<const double> forward(std::span<const double> input, Workspace& ws) const;
  std::vector<double> forward(std::span<const double> input) const;

  /// Pre-activation convolution output, [conv_length][F]. The kernel is applied
  /// as a true convolution (reversed over time).
  std::vector<double> convolve(std::span<const double> input) const;

  /// Adds d loss / d parameter for one window into `grads` (same layout as
  /// params()) and returns the loss.
  double backward(std::span<const double> input, double target, LossKind loss, ParamSet& grads,
                  Workspace& ws) const;

 private:
  void check_input(std::span<const double> input) const;

  NetworkSpec spec_;
  ParamSet params_;
};

}  // namespace fallpred::nn
