#pragma once

// Flat binary model format, all integers and floats little-endian:
//
//   magic      8 bytes  "STLFNET\0"
//   version    u32      kFormatVersion
//   cell kind  u32      0 lstm, 1 rnn, 2 gru
//   dims       4 x u64  input, hidden, output, layers
//   count      u64      number of parameters that follow
//   params     f64[count], tensors in declared order, each column-major

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "stlf/error.hpp"
#include "stlf/nn/network.hpp"

namespace stlf::nn {

inline constexpr std::array<char, 8> kModelMagic = {'S', 'T', 'L', 'F', 'N', 'E', 'T', '\0'};
inline constexpr std::uint32_t kFormatVersion = 1;

namespace wire {

template <class U>
void put_le(std::ostream& out, U v) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw DataError("model file truncated");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double d) { put_le(out, std::bit_cast<std::uint64_t>(d)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace wire

struct ModelHeader {
  CellKind kind = CellKind::lstm;
  NetDims dims;
};

inline ModelHeader read_model_header(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kModelMagic) {
    throw DataError("not a model file (bad magic)");
  }
  const auto version = wire::get_le<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version));
  }
  const auto kind = wire::get_le<std::uint32_t>(in);
  if (kind > 2) throw DataError("unknown cell kind " + std::to_string(kind));
  ModelHeader h;
  h.kind = static_cast<CellKind>(kind);
  h.dims.input = wire::get_le<std::uint64_t>(in);
  h.dims.hidden = wire::get_le<std::uint64_t>(in);
  h.dims.output = wire::get_le<std::uint64_t>(in);
  h.dims.layers = wire::get_le<std::uint64_t>(in);
  return h;
}

template <class Cell>
void write_params(std::ostream& out, const NetParams<Cell>& p) {
  out.write(kModelMagic.data(), kModelMagic.size());
  wire::put_le<std::uint32_t>(out, kFormatVersion);
  wire::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Cell::kind));
  wire::put_le<std::uint64_t>(out, p.dims.input);
  wire::put_le<std::uint64_t>(out, p.dims.hidden);
  wire::put_le<std::uint64_t>(out, p.dims.output);
  wire::put_le<std::uint64_t>(out, p.dims.layers);
  wire::put_le<std::uint64_t>(out, p.parameter_count());
  for (const auto& t : p.tensors()) {
    for (double v : t.data) wire::put_f64(out, v);
  }
}

// Reads the tensor block that follows an already consumed header.
template <class Cell>
NetParams<Cell> read_params_body(std::istream& in, const ModelHeader& h) {
  if (h.kind != Cell::kind) throw DataError("model file holds a different cell type");
  if (h.dims.input > (1u << 20) || h.dims.hidden > (1u << 16) || h.dims.output > (1u << 20) ||
      h.dims.layers > 64) {
    throw DataError("implausible model dimensions");
  }
  auto p = NetParams<Cell>::zeros(h.dims);
  const auto count = wire::get_le<std::uint64_t>(in);
  if (count != p.parameter_count()) throw DataError("parameter count does not match dimensions");
  for (auto& t : p.tensors()) {
    for (double& v : t.data) v = wire::get_f64(in);
  }
  return p;
}

template <class Cell>
NetParams<Cell> read_params(std::istream& in) {
  return read_params_body<Cell>(in, read_model_header(in));
}

}  // namespace stlf::nn
