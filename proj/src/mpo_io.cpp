#include "hpte/operator_mps.hpp"

#include <array>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hpte {

namespace {

constexpr std::array<char, 8> kMagic{'H', 'P', 'T', 'E', 'M', 'P', 'O', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("truncated MPO snapshot");
  return value;
}

}  // namespace

void write_mpo(std::ostream& out, const VectorizedMPO& mpo) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, mpo.length);
  put<std::int32_t>(out, local_dim(mpo.kind));
  put<std::int32_t>(out, static_cast<std::int32_t>(mpo.group));
  put<double>(out, mpo.norm_log);
  put<double>(out, mpo.discarded_weight);
  put<std::int32_t>(out, mpo.degenerate_cuts);
  for (const auto& bond : mpo.bonds) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(bond.sectors.size()));
    for (const auto& [q, v] : bond.sectors) {
      put<std::int32_t>(out, q);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
    }
  }
  for (const auto& site : mpo.sites) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(site.blocks.size()));
    for (const auto& [key, m] : site.blocks) {
      put<std::int32_t>(out, key.first);
      put<std::int32_t>(out, key.second);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(cplx) * m.size()));
    }
  }
  if (!out) throw std::runtime_error("failed to write MPO snapshot");
}

VectorizedMPO read_mpo(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not an MPO snapshot (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported MPO snapshot version " + std::to_string(version));

  VectorizedMPO mpo;
  mpo.length = get<std::int32_t>(in);
  const int d = get<std::int32_t>(in);
  if (mpo.length < 1 || (d != 2 && d != 3)) throw std::runtime_error("corrupt MPO snapshot header");
  mpo.kind = d == 2 ? SpinKind::Half : SpinKind::One;
  const auto group = get<std::int32_t>(in);
  if (group < 0 || group > 2) throw std::runtime_error("corrupt MPO snapshot charge group");
  mpo.group = static_cast<ChargeGroup>(group);
  mpo.norm_log = get<double>(in);
  mpo.discarded_weight = get<double>(in);
  mpo.degenerate_cuts = get<std::int32_t>(in);
  mpo.bonds.resize(mpo.length + 1);
  for (auto& bond : mpo.bonds) {
    const auto n = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int q = get<std::int32_t>(in);
      const auto len = get<std::uint32_t>(in);
      Eigen::VectorXd v(len);
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * len));
      bond.sectors.emplace(q, std::move(v));
    }
  }
  mpo.sites.resize(mpo.length);
  const int D = d * d;
  for (auto& site : mpo.sites) {
    const auto n = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int ql = get<std::int32_t>(in);
      const int a = get<std::int32_t>(in);
      if (a < 0 || a >= D) throw std::runtime_error("corrupt MPO snapshot block index");
      const auto rows = get<std::uint32_t>(in);
      const auto cols = get<std::uint32_t>(in);
      Matrix m(rows, cols);
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(cplx) * m.size()));
      site.blocks.emplace(std::pair{ql, a}, std::move(m));
    }
  }
  if (!in) throw std::runtime_error("truncated MPO snapshot");
  return mpo;
}

}  // namespace hpte
