#pragma once

// Binary bundle of per-component models: magic, version, count, then for each
// component its id, normalization range and a network block.

#include <istream>
#include <ostream>
#include <sstream>

#include "stlf/nn/serialize.hpp"
#include "stlf/pipeline.hpp"

namespace stlf {

inline constexpr std::array<char, 8> kBundleMagic = {'S', 'T', 'L', 'F', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kBundleVersion = 1;

inline void write_models(std::ostream& out, const std::vector<pipeline::ComponentModel>& models) {
  out.write(kBundleMagic.data(), kBundleMagic.size());
  nn::wire::put_le<std::uint32_t>(out, kBundleVersion);
  nn::wire::put_le<std::uint64_t>(out, models.size());
  for (const auto& m : models) {
    nn::wire::put_le<std::uint64_t>(out, m.component_id);
    nn::wire::put_f64(out, m.norm.x_min);
    nn::wire::put_f64(out, m.norm.x_max);
    std::visit([&](const auto& p) { nn::write_params(out, p); }, m.params);
  }
}

inline std::vector<pipeline::ComponentModel> read_models(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kBundleMagic) {
    throw DataError("not a model bundle (bad magic)");
  }
  const auto version = nn::wire::get_le<std::uint32_t>(in);
  if (version != kBundleVersion) {
    throw DataError("unsupported model bundle version " + std::to_string(version));
  }
  const auto count = nn::wire::get_le<std::uint64_t>(in);
  if (count == 0 || count > 4096) throw DataError("implausible component count");
  std::vector<pipeline::ComponentModel> models;
  for (std::uint64_t i = 0; i < count; ++i) {
    pipeline::ComponentModel m;
    m.component_id = nn::wire::get_le<std::uint64_t>(in);
    m.norm.x_min = nn::wire::get_f64(in);
    m.norm.x_max = nn::wire::get_f64(in);
    const auto header = nn::read_model_header(in);
    switch (header.kind) {
      case nn::CellKind::lstm: m.params = nn::read_params_body<nn::LstmCell>(in, header); break;
      case nn::CellKind::rnn: m.params = nn::read_params_body<nn::RnnCell>(in, header); break;
      case nn::CellKind::gru: m.params = nn::read_params_body<nn::GruCell>(in, header); break;
    }
    models.push_back(std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after model bundle");
  return models;
}

inline std::string models_to_bytes(const std::vector<pipeline::ComponentModel>& models) {
  std::ostringstream out(std::ios::binary);
  write_models(out, models);
  return std::move(out).str();
}

}  // namespace stlf
