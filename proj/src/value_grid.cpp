#include "tpbb/value_grid.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "tpbb/errors.hpp"

namespace tpbb {

namespace {

constexpr char kMagic[8] = {'T', 'P', 'B', 'B', 'V', 'G', 'R', 'D'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw PersistFailure("value grid file truncated");
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void write_kernel(Writer& w, const KernelSpec& k) {
  w.u32(static_cast<std::uint32_t>(k.kind));
  w.f64(k.param);
}

KernelSpec read_kernel(Reader& r) {
  const auto kind = r.u32();
  if (kind > static_cast<std::uint32_t>(KernelKind::kParabolic)) {
    throw PersistFailure("value grid file: bad kernel kind");
  }
  return {static_cast<KernelKind>(kind), r.f64()};
}

}  // namespace

void GridGeometry::validate() const {
  if (nodes < 2) throw ValidationError("dp.nodes must be >= 2");
  if (!(lo < hi)) throw ValidationError("grid bounds must satisfy lo < hi");
}

void DpSetup::validate() const {
  geometry.validate();
  cost.validate();
  if (control_nodes < 3 || control_nodes % 2 == 0) {
    throw ValidationError("dp.control_nodes must be odd and >= 3");
  }
}

double interpolate(std::span<const double> field, const GridGeometry& g, const BinaryState& s) {
  const AxisLocator loc(g);
  return interpolate_stencils(field, static_cast<std::size_t>(g.nodes), loc(s.x1), loc(s.x2),
                              loc(s.y1), loc(s.y2));
}

ValueGrid ValueGrid::zeros(const DpSetup& setup) {
  setup.validate();
  ValueGrid g;
  g.setup = setup;
  g.values.assign(setup.geometry.size(), 0.0);
  return g;
}

void save_value_grid(const std::filesystem::path& path, const ValueGrid& grid) {
  const auto& s = grid.setup;
  if (grid.values.size() != s.geometry.size()) {
    throw PersistFailure("value grid has inconsistent size");
  }
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  for (int axis = 0; axis < 4; ++axis) w.u32(static_cast<std::uint32_t>(s.geometry.nodes));
  w.f64(s.geometry.spacing());
  w.f64(s.geometry.lo);
  w.f64(s.geometry.hi);
  for (double v : {s.cost.a_f, s.cost.a_l, s.cost.gamma, s.cost.lambda, s.cost.reference,
                   s.cost.dt, s.cost.u_min, s.cost.u_max}) {
    w.f64(v);
  }
  write_kernel(w, s.kernels.ff);
  write_kernel(w, s.kernels.fl);
  write_kernel(w, s.kernels.ll);
  w.u32(static_cast<std::uint32_t>(s.control_nodes));
  w.f64(grid.diagnostics.residual);
  w.u32(static_cast<std::uint32_t>(grid.diagnostics.iterations));
  w.u32(grid.diagnostics.converged ? 1u : 0u);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistFailure("cannot open '" + path.string() + "' for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
  } else {
    Writer body;
    for (double v : grid.values) body.f64(v);
    out.write(body.bytes().data(), static_cast<std::streamsize>(body.bytes().size()));
  }
  if (!out) throw PersistFailure("write to '" + path.string() + "' failed");
}

ValueGrid load_value_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistFailure("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));

  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw PersistFailure("'" + path.string() + "' is not a value grid file");
  }
  if (const auto version = r.u32(); version != kVersion) {
    throw PersistFailure("unsupported value grid version " + std::to_string(version));
  }
  std::array<std::uint32_t, 4> counts{};
  for (auto& c : counts) c = r.u32();
  if (counts[0] != counts[1] || counts[0] != counts[2] || counts[0] != counts[3] || counts[0] < 2) {
    throw PersistFailure("value grid file: axes must share a node count >= 2");
  }
  ValueGrid g;
  auto& s = g.setup;
  s.geometry.nodes = static_cast<int>(counts[0]);
  const double h = r.f64();
  s.geometry.lo = r.f64();
  s.geometry.hi = r.f64();
  if (std::abs(h - s.geometry.spacing()) > 1e-12 * std::abs(h)) {
    throw PersistFailure("value grid file: spacing inconsistent with bounds");
  }
  s.cost.a_f = r.f64();
  s.cost.a_l = r.f64();
  s.cost.gamma = r.f64();
  s.cost.lambda = r.f64();
  s.cost.reference = r.f64();
  s.cost.dt = r.f64();
  s.cost.u_min = r.f64();
  s.cost.u_max = r.f64();
  s.kernels.ff = read_kernel(r);
  s.kernels.fl = read_kernel(r);
  s.kernels.ll = read_kernel(r);
  s.control_nodes = static_cast<int>(r.u32());
  g.diagnostics.residual = r.f64();
  g.diagnostics.iterations = static_cast<int>(r.u32());
  g.diagnostics.converged = r.u32() != 0;

  const std::size_t n = s.geometry.size();
  if (r.remaining() != n * sizeof(double)) {
    throw PersistFailure("value grid file: payload size mismatch");
  }
  g.values.resize(n);
  for (auto& v : g.values) v = r.f64();
  return g;
}

void check_compatible(const ValueGrid& grid, const DpSetup& expected) {
  const auto& s = grid.setup;
  std::ostringstream why;
  const auto field = [&](const char* name, double have, double want) {
    if (have != want) why << " " << name << " (grid " << have << ", config " << want << ");";
  };
  field("dp.nodes", s.geometry.nodes, expected.geometry.nodes);
  field("grid.lo", s.geometry.lo, expected.geometry.lo);
  field("grid.hi", s.geometry.hi, expected.geometry.hi);
  field("dp.control_nodes", s.control_nodes, expected.control_nodes);
  field("cost.a_f", s.cost.a_f, expected.cost.a_f);
  field("cost.a_l", s.cost.a_l, expected.cost.a_l);
  field("cost.gamma", s.cost.gamma, expected.cost.gamma);
  field("cost.lambda", s.cost.lambda, expected.cost.lambda);
  field("cost.reference", s.cost.reference, expected.cost.reference);
  field("cost.dt", s.cost.dt, expected.cost.dt);
  field("cost.u_min", s.cost.u_min, expected.cost.u_min);
  field("cost.u_max", s.cost.u_max, expected.cost.u_max);
  const auto kernel = [&](const char* name, const KernelSpec& have, const KernelSpec& want) {
    if (!(have == want)) why << " " << name << " (grid " << describe(have) << ", config " << describe(want) << ");";
  };
  kernel("kernels.ff", s.kernels.ff, expected.kernels.ff);
  kernel("kernels.fl", s.kernels.fl, expected.kernels.fl);
  kernel("kernels.ll", s.kernels.ll, expected.kernels.ll);
  if (!why.str().empty()) {
    throw ValidationError("value grid does not match the run configuration:" + why.str());
  }
}

}  // namespace tpbb
