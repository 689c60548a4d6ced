#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fallpred/error.hpp"
#include "fallpred/nn/adam.hpp"
#include "fallpred/nn/kernels.hpp"
#include "fallpred/nn/serialize.hpp"
#include "gradcheck.hpp"

using namespace fallpred;
using namespace fallpred::nn;

namespace {

Network tiny_conv(std::vector<double> kernel) {
  NetworkSpec s;
  s.window_length = 3;
  s.channels = 1;
  s.filters = 1;
  s.kernel = kernel.size();
  s.pool = 1;
  s.hidden = 1;
  Network net(s);
  net.params().fill(0.0);
  net.params().at("conv.weight").values = std::move(kernel);
  return net;
}

}  // namespace

TEST_CASE("convolution flips the kernel") {
  const Network net = tiny_conv({1.0, -1.0});
  const auto out = net.convolve(std::vector<double>{3.0, 5.0, 9.0});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 4.0);
}

TEST_CASE("max pooling keeps the first of equal values") {
  NetworkSpec s;
  s.window_length = 4;
  s.channels = 1;
  s.filters = 1;
  s.kernel = 1;
  s.pool = 2;
  s.hidden = 1;
  Network net(s);
  net.params().fill(0.0);
  net.params().at("conv.weight").values = {1.0};
  net.params().at("fc1.weight").values = {1.0, 1.0};
  net.params().at("fc2.weight").values = {1.0};
  Workspace ws;
  net.forward(std::vector<double>{2.0, 2.0, 1.0, 3.0}, ws);
  CHECK(ws.pooled == std::vector<double>{2.0, 3.0});
  CHECK(ws.argmax == std::vector<std::uint32_t>{0, 3});
}

TEST_CASE("layer shape errors name the layer") {
  NetworkSpec s;
  s.kernel = 40;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("conv1d"), ModelError);
  s = NetworkSpec{};
  s.pool = 27;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("maxpool"), ModelError);
  s = NetworkSpec{};
  s.hidden = 0;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("dense1"), ModelError);
  Network net(NetworkSpec{});
  CHECK_THROWS_AS(net.forward(std::vector<double>(10)), ModelError);
}

TEST_CASE("default network matches the reference layout") {
  NetworkSpec s;
  CHECK(s.conv_length() == 26);
  CHECK(s.pooled_length() == 13);
  CHECK(s.flat_size() == 104);
  Network net(s);
  CHECK(net.params().at("conv.weight").values.size() == 8 * 5 * 8);
  CHECK(net.params().at("fc1.weight").values.size() == 32 * 104);
  CHECK(net.params().count() == 320 + 8 + 3328 + 32 + 32 + 1);
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(77);
  for (auto loss : {LossKind::bce, LossKind::ce, LossKind::mse}) {
    for (int k = 0; k < 4; ++k) {
      const auto spec = testing::random_spec(rng, loss);
      Network net(spec);
      net.initialize(rng.next());
      std::vector<double> x(spec.input_size());
      for (double& v : x) v = rng.uniform(-1, 1);
      const auto r = testing::gradient_check(net, x, testing::random_target(rng, spec, loss), loss);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.checked > 0);
    }
  }
}

TEST_CASE("losses are stable at extreme logits") {
  CHECK(loss(LossKind::bce, std::vector<double>{800.0}, 1.0) == doctest::Approx(0.0));
  CHECK(loss(LossKind::bce, std::vector<double>{-800.0}, 1.0) == doctest::Approx(800.0));
  CHECK(loss(LossKind::bce, std::vector<double>{0.0}, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(loss(LossKind::ce, std::vector<double>{1000.0, 0.0, -1000.0}, 0.0) == doctest::Approx(0.0));
  CHECK(loss(LossKind::ce, std::vector<double>{0.0, 0.0, 0.0}, 2.0) == doctest::Approx(std::log(3.0)));
  CHECK(loss(LossKind::mse, std::vector<double>{0.3}, 0.5) == doctest::Approx(0.04));
  std::vector<double> g(3);
  loss_and_grad(LossKind::ce, std::vector<double>{1.0, 2.0, 3.0}, 1.0, g);
  CHECK(g[0] + g[1] + g[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS(loss(LossKind::bce, std::vector<double>{0.1}, 0.5), ModelError);
  CHECK_THROWS_AS(loss(LossKind::ce, std::vector<double>{0.1, 0.2}, 2.0), ModelError);
  CHECK_THROWS_AS(loss(LossKind::mse, std::vector<double>{std::nan("")}, 0.5), ModelError);
}

TEST_CASE("sigmoid head stays below one") {
  NetworkSpec s;
  s.output = OutputActivation::sigmoid;
  Network net(s);
  net.params().fill(0.0);
  net.params().at("fc2.bias").values = {1000.0};
  const auto y = net.forward(std::vector<double>(s.input_size(), 0.0));
  CHECK(y[0] < 1.0);
  CHECK(y[0] > 0.999);
}

TEST_CASE("adam takes a bias-corrected first step") {
  NetworkSpec s;
  s.window_length = 2;
  s.channels = 1;
  s.filters = 1;
  s.kernel = 1;
  s.pool = 1;
  s.hidden = 1;
  Network net(s);
  net.params().fill(1.0);
  net.params().at("fc1.bias").frozen = true;
  ParamSet g = net.params().zeros_like();
  g.fill(0.5);
  Adam adam(AdamConfig{0.1, 0.9, 0.999, 1e-8});
  adam.step(net.params(), g);
  // first step moves every free parameter by lr * g / (|g| + eps)
  CHECK(net.params().at("conv.weight").values[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)));
  CHECK(net.params().at("fc1.bias").values[0] == 1.0);
  CHECK(adam.steps() == 1);
  g.at("fc2.weight").values[0] = std::nan("");
  CHECK_THROWS_WITH_AS(adam.step(net.params(), g), doctest::Contains("fc2.weight"), ModelError);
}

TEST_CASE("separable toy data is learned") {
  NetworkSpec s;
  s.window_length = 6;
  s.channels = 2;
  s.filters = 4;
  s.kernel = 3;
  s.pool = 2;
  s.hidden = 8;
  Network net(s);
  net.initialize(3);
  Rng rng(8);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 64; ++i) {
    const double y = i % 2;
    std::vector<double> x(s.input_size());
    for (double& v : x) v = rng.uniform(0, 0.2) + (y ? 0.8 : 0.0);
    xs.push_back(x);
    ys.push_back(y);
  }
  Adam adam(AdamConfig{0.01});
  Workspace ws;
  double mean = 1.0;
  for (int stepno = 0; stepno < 500 && mean >= 0.01; ++stepno) {
    ParamSet g = net.params().zeros_like();
    mean = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mean += net.backward(xs[i], ys[i], LossKind::bce, g, ws);
    mean /= xs.size();
    for (auto& t : g.tensors)
      for (double& v : t.values) v /= xs.size();
    adam.step(net.params(), g);
  }
  CHECK(mean < 0.01);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  using namespace kernels;
  Rng rng(11);
  for (std::size_t n : {0, 1, 3, 4, 7, 8, 15, 16, 17, 33, 104, 1001}) {
    std::vector<double> a(n), b(n), y1(n), y2(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-1, 1);
      b[i] = rng.uniform(-1, 1);
      y1[i] = y2[i] = rng.uniform(-1, 1);
    }
    const double ref = scalar::dot(a.data(), b.data(), n);
    scalar::axpy(0.37, a.data(), y1.data(), n);
#ifdef FALLPRED_HAVE_AVX2_KERNELS
    if (isa_supported(Isa::avx2)) {
      CHECK(avx2::dot(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
      avx2::axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-14));
    }
#endif
  }
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  set_active_isa(before);
}

TEST_CASE("network outputs agree across kernel paths") {
  using namespace kernels;
  if (!isa_supported(Isa::avx2)) return;
  Network net(NetworkSpec{});
  net.initialize(5);
  Rng rng(6);
  std::vector<double> x(net.spec().input_size());
  for (double& v : x) v = rng.uniform();
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  const double a = net.forward(x)[0];
  set_active_isa(Isa::avx2);
  const double b = net.forward(x)[0];
  set_active_isa(before);
  CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("parameters serialize bit-exactly") {
  NetworkSpec s;
  s.outputs = 3;
  Network net(s);
  net.initialize(99);
  std::stringstream ss;
  write_network(ss, net);
  const std::string bytes = ss.str();
  const Network back = read_network(ss);
  CHECK(back.spec() == net.spec());
  for (std::size_t i = 0; i < net.params().tensors.size(); ++i)
    CHECK(back.params().tensors[i].values == net.params().tensors[i].values);

  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  std::stringstream v(wrong_version);
  CHECK_THROWS_WITH_AS(read_network(v), doctest::Contains("version"), ModelError);
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_network(truncated), ModelError);
  std::string wrong_hash = bytes;
  wrong_hash[12] ^= 1;
  std::stringstream h(wrong_hash);
  CHECK_THROWS_AS(read_network(h), ModelError);
}

TEST_CASE("initialization is deterministic") {
  Network a(NetworkSpec{}), b(NetworkSpec{});
  a.initialize(4);
  b.initialize(4);
  CHECK(a.params().tensors[0].values == b.params().tensors[0].values);
}
