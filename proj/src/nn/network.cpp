#include "fallpred/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fallpred/binary_io.hpp"
#include "fallpred/error.hpp"
#include "fallpred/nn/kernels.hpp"
#include "fallpred/rng.hpp"

namespace fallpred::nn {

void NetworkSpec::validate() const {
  if (channels == 0 || window_length == 0) throw ModelError("input: window must have at least one step and channel");
  if (filters == 0) throw ModelError("conv1d: needs at least one filter");
  if (kernel == 0 || stride == 0) throw ModelError("conv1d: kernel width and stride must be positive");
  if (kernel > window_length) throw ModelError("conv1d: kernel wider than the input window");
  if (pool == 0 || pooled_length() == 0) throw ModelError("maxpool: pool width exceeds the convolution output");
  if (hidden == 0) throw ModelError("dense1: needs at least one unit");
  if (outputs == 0) throw ModelError("dense2: needs at least one output");
}

std::string NetworkSpec::describe() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "conv1d-net/m=%zu/d=%zu/F=%zu/k=%zu/s=%zu/p=%zu/h=%zu/o=%zu/act=%s", window_length,
                channels, filters, kernel, stride, pool, hidden, outputs,
                output == OutputActivation::sigmoid ? "sigmoid" : "none");
  return buf;
}

std::uint64_t NetworkSpec::hash() const { return binary::fnv1a(describe()); }

Tensor& ParamSet::at(std::string_view name) {
  for (Tensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw ModelError("no parameter named '" + std::string(name) + "'");
}

const Tensor& ParamSet::at(std::string_view name) const { return const_cast<ParamSet*>(this)->at(name); }

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors) n += t.values.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out = *this;
  out.fill(0.0);
  return out;
}

void ParamSet::fill(double v) {
  for (Tensor& t : tensors) std::fill(t.values.begin(), t.values.end(), v);
}

namespace {

enum TensorIndex { kConvW, kConvB, kFc1W, kFc1B, kFc2W, kFc2B };

ParamSet make_params(const NetworkSpec& s) {
  ParamSet p;
  p.tensors = {{"conv.weight", std::vector<double>(s.filters * s.kernel * s.channels)},
               {"conv.bias", std::vector<double>(s.filters)},
               {"fc1.weight", std::vector<double>(s.hidden * s.flat_size())},
               {"fc1.bias", std::vector<double>(s.hidden)},
               {"fc2.weight", std::vector<double>(s.outputs * s.hidden)},
               {"fc2.bias", std::vector<double>(s.outputs)}};
  return p;
}

void prepare(const NetworkSpec& s, Workspace& ws) {
  ws.flipped.resize(s.filters * s.kernel * s.channels);
  ws.conv_pre.resize(s.conv_length() * s.filters);
  ws.conv_act.resize(ws.conv_pre.size());
  ws.pooled.resize(s.flat_size());
  ws.argmax.resize(s.flat_size());
  ws.hidden_pre.resize(s.hidden);
  ws.hidden_act.resize(s.hidden);
  ws.logits.resize(s.outputs);
  ws.output.resize(s.outputs);
}

/// Reverses each filter along the kernel axis: flipped[f][j] = w[f][k-1-j].
void flip_kernel(const NetworkSpec& s, std::span<const double> w, std::span<double> out) {
  const std::size_t row = s.channels;
  for (std::size_t f = 0; f < s.filters; ++f) {
    for (std::size_t j = 0; j < s.kernel; ++j) {
      const double* src = w.data() + (f * s.kernel + (s.kernel - 1 - j)) * row;
      std::copy(src, src + row, out.data() + (f * s.kernel + j) * row);
    }
  }
}

}  // namespace

Network::Network(NetworkSpec spec) : spec_(spec) {
  spec_.validate();
  params_ = make_params(spec_);
}

Network::Network(NetworkSpec spec, ParamSet params) : spec_(spec), params_(std::move(params)) {
  spec_.validate();
  const ParamSet expected = make_params(spec_);
  if (params_.tensors.size() != expected.tensors.size()) throw ModelError("parameter set does not match network");
  for (std::size_t i = 0; i < expected.tensors.size(); ++i) {
    if (params_.tensors[i].name != expected.tensors[i].name ||
        params_.tensors[i].values.size() != expected.tensors[i].values.size()) {
      throw ModelError("parameter '" + expected.tensors[i].name + "' has the wrong shape");
    }
  }
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const double fan_in[] = {static_cast<double>(spec_.kernel * spec_.channels),
                           static_cast<double>(spec_.kernel * spec_.channels),
                           static_cast<double>(spec_.flat_size()), static_cast<double>(spec_.flat_size()),
                           static_cast<double>(spec_.hidden), static_cast<double>(spec_.hidden)};
  for (std::size_t i = 0; i < params_.tensors.size(); ++i) {
    const double bound = 1.0 / std::sqrt(fan_in[i]);
    for (double& v : params_.tensors[i].values) v = rng.uniform(-bound, bound);
  }
}

void Network::check_input(std::span<const double> input) const {
  if (input.size() != spec_.input_size()) {
    throw ModelError("conv1d: input has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(spec_.input_size()));
  }
}

std::span<const double> Network::forward(std::span<const double> input, Workspace& ws) const {
  check_input(input);
  const NetworkSpec& s = spec_;
  prepare(s, ws);
  const auto& t = params_.tensors;
  const std::size_t span_len = s.kernel * s.channels;

  flip_kernel(s, t[kConvW].values, ws.flipped);
  for (std::size_t pos = 0; pos < s.conv_length(); ++pos) {
    const double* window = input.data() + pos * s.stride * s.channels;
    for (std::size_t f = 0; f < s.filters; ++f) {
      const double v = t[kConvB].values[f] + kernels::dot(ws.flipped.data() + f * span_len, window, span_len);
      ws.conv_pre[pos * s.filters + f] = v;
      ws.conv_act[pos * s.filters + f] = v > 0.0 ? v : 0.0;
    }
  }

  for (std::size_t u = 0; u < s.pooled_length(); ++u) {
    for (std::size_t f = 0; f < s.filters; ++f) {
      std::size_t best = u * s.pool * s.filters + f;
      for (std::size_t r = 1; r < s.pool; ++r) {
        const std::size_t idx = (u * s.pool + r) * s.filters + f;
        if (ws.conv_act[idx] > ws.conv_act[best]) best = idx;  // first index wins ties
      }
      ws.pooled[u * s.filters + f] = ws.conv_act[best];
      ws.argmax[u * s.filters + f] = static_cast<std::uint32_t>(best);
    }
  }

  const std::size_t flat = s.flat_size();
  for (std::size_t h = 0; h < s.hidden; ++h) {
    const double v = t[kFc1B].values[h] + kernels::dot(t[kFc1W].values.data() + h * flat, ws.pooled.data(), flat);
    ws.hidden_pre[h] = v;
    ws.hidden_act[h] = v > 0.0 ? v : 0.0;
  }
  for (std::size_t o = 0; o < s.outputs; ++o) {
    ws.logits[o] = t[kFc2B].values[o] + kernels::dot(t[kFc2W].values.data() + o * s.hidden, ws.hidden_act.data(), s.hidden);
    ws.output[o] = s.output == OutputActivation::sigmoid ? kUnitScale * sigmoid(ws.logits[o]) : ws.logits[o];
  }
  return ws.output;
}

std::vector<double> Network::forward(std::span<const double> input) const {
  Workspace ws;
  const auto out = forward(input, ws);
  return {out.begin(), out.end()};
}

std::vector<double> Network::convolve(std::span<const double> input) const {
  Workspace ws;
  forward(input, ws);
  return ws.conv_pre;
}

double Network::backward(std::span<const double> input, double target, LossKind loss_kind, ParamSet& grads,
                         Workspace& ws) const {
  forward(input, ws);
  const NetworkSpec& s = spec_;
  const auto& t = params_.tensors;
  auto& g = grads.tensors;
  if (g.size() != t.size()) throw ModelError("gradient set does not match network");

  ws.d_output.assign(s.outputs, 0.0);
  const double value = loss_and_grad(loss_kind, ws.output, target, ws.d_output);
  if (s.output == OutputActivation::sigmoid) {
    for (std::size_t o = 0; o < s.outputs; ++o) {
      const double sg = sigmoid(ws.logits[o]);
      ws.d_output[o] *= kUnitScale * sg * (1.0 - sg);
    }
  }

  // dense2
  ws.d_hidden.assign(s.hidden, 0.0);
  for (std::size_t o = 0; o < s.outputs; ++o) {
    const double d = ws.d_output[o];
    kernels::axpy(d, ws.hidden_act.data(), g[kFc2W].values.data() + o * s.hidden, s.hidden);
    g[kFc2B].values[o] += d;
    kernels::axpy(d, t[kFc2W].values.data() + o * s.hidden, ws.d_hidden.data(), s.hidden);
  }

  // relu + dense1
  const std::size_t flat = s.flat_size();
  ws.d_flat.assign(flat, 0.0);
  for (std::size_t h = 0; h < s.hidden; ++h) {
    if (!(ws.hidden_pre[h] > 0.0)) continue;
    const double d = ws.d_hidden[h];
    kernels::axpy(d, ws.pooled.data(), g[kFc1W].values.data() + h * flat, flat);
    g[kFc1B].values[h] += d;
    kernels::axpy(d, t[kFc1W].values.data() + h * flat, ws.d_flat.data(), flat);
  }

  // max-pool routes to the winning position, then relu
  ws.d_conv.assign(ws.conv_pre.size(), 0.0);
  for (std::size_t i = 0; i < flat; ++i) ws.d_conv[ws.argmax[i]] += ws.d_flat[i];

  const std::size_t span_len = s.kernel * s.channels;
  ws.d_flipped.assign(ws.flipped.size(), 0.0);
  for (std::size_t pos = 0; pos < s.conv_length(); ++pos) {
    const double* window = input.data() + pos * s.stride * s.channels;
    for (std::size_t f = 0; f < s.filters; ++f) {
      const std::size_t idx = pos * s.filters + f;
      if (!(ws.conv_pre[idx] > 0.0) || ws.d_conv[idx] == 0.0) continue;
      kernels::axpy(ws.d_conv[idx], window, ws.d_flipped.data() + f * span_len, span_len);
      g[kConvB].values[f] += ws.d_conv[idx];
    }
  }
  // undo the kernel reversal when accumulating into conv.weight
  auto& dw = g[kConvW].values;
  for (std::size_t f = 0; f < s.filters; ++f) {
    for (std::size_t j = 0; j < s.kernel; ++j) {
      const double* src = ws.d_flipped.data() + (f * s.kernel + (s.kernel - 1 - j)) * s.channels;
      double* dst = dw.data() + (f * s.kernel + j) * s.channels;
      for (std::size_t c = 0; c < s.channels; ++c) dst[c] += src[c];
    }
  }
  return value;
}

}  // namespace fallpred::nn
