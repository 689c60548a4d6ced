#include "fallpred/nn/serialize.hpp"

#include <istream>
#include <ostream>

#include "fallpred/binary_io.hpp"
#include "fallpred/error.hpp"

namespace fallpred::nn {

namespace {
constexpr char kMagic[8] = {'F', 'P', 'N', 'N', 'P', 'A', 'R', 'M'};
}

void write_network(std::ostream& out, const Network& net) {
  const NetworkSpec& s = net.spec();
  out.write(kMagic, sizeof kMagic);
  binary::put_u32(out, kParamFormatVersion);
  binary::put_u64(out, s.hash());
  for (std::size_t v : {s.window_length, s.channels, s.filters, s.kernel, s.stride, s.pool, s.hidden, s.outputs}) {
    binary::put_u64(out, v);
  }
  binary::put_u32(out, s.output == OutputActivation::sigmoid ? 1 : 0);
  binary::put_u32(out, static_cast<std::uint32_t>(net.params().tensors.size()));
  for (const Tensor& t : net.params().tensors) {
    binary::put_string(out, t.name);
    binary::put_u64(out, t.values.size());
    binary::put_f64s(out, t.values);
  }
}

Network read_network(std::istream& in) {
  try {
    char magic[8];
    binary::read_exact(in, magic, sizeof magic);
    if (!std::equal(magic, magic + 8, kMagic)) throw ModelError("not a network parameter file");
    const std::uint32_t version = binary::get_u32(in);
    if (version != kParamFormatVersion) {
      throw ModelError("network format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kParamFormatVersion) + ")");
    }
    const std::uint64_t hash = binary::get_u64(in);
    NetworkSpec s;
    for (std::size_t* field : {&s.window_length, &s.channels, &s.filters, &s.kernel, &s.stride, &s.pool, &s.hidden,
                               &s.outputs}) {
      *field = binary::get_u64(in);
    }
    s.output = binary::get_u32(in) == 1 ? OutputActivation::sigmoid : OutputActivation::none;
    if (s.hash() != hash) throw ModelError("network architecture hash mismatch");
    s.validate();

    ParamSet params;
    const std::uint32_t count = binary::get_u32(in);
    if (count > 64) throw ModelError("implausible tensor count in network file");
    for (std::uint32_t i = 0; i < count; ++i) {
      Tensor t;
      t.name = binary::get_string(in, 256);
      const std::uint64_t n = binary::get_u64(in);
      if (n > (1ULL << 28)) throw ModelError("implausible tensor size in network file");
      t.values = binary::get_f64s(in, n);
      params.tensors.push_back(std::move(t));
    }
    return Network(s, std::move(params));
  } catch (const DataError& e) {
    throw ModelError(std::string("truncated network file: ") + e.what());
  }
}

}  // namespace fallpred::nn
