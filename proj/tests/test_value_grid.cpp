#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tpbb/errors.hpp"
#include "tpbb/value_grid.hpp"

using namespace tpbb;

namespace {

DpSetup small_setup(int nodes = 5) {
  DpSetup s;
  s.geometry = {nodes, -1.0, 1.0};
  s.cost.reference = -0.5;
  s.kernels = {KernelSpec::Constant(1), KernelSpec::Constant(1), KernelSpec::Constant(1)};
  s.control_nodes = 5;
  return s;
}

ValueGrid affine_grid(const DpSetup& setup) {
  ValueGrid v = ValueGrid::zeros(setup);
  const auto& g = setup.geometry;
  const auto n = static_cast<std::size_t>(g.nodes);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          const double x1 = g.coord(a), x2 = g.coord(b), y1 = g.coord(c), y2 = g.coord(d);
          v.values[g.index(a, b, c, d)] = 1.0 + 2.0 * x1 - 0.5 * x2 + 0.25 * y1 + 3.0 * y2 + x1 * y2;
        }
  return v;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tpbb_test_" + name);
}

}  // namespace

TEST(Interpolation, NodesReturnStoredValues) {
  const auto setup = small_setup();
  ValueGrid v = ValueGrid::zeros(setup);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (auto& x : v.values) x = u(rng);
  const auto& g = setup.geometry;
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t d = 0; d < 5; ++d) {
      const BinaryState s{g.coord(a), g.coord(4 - a), g.coord(d), g.coord((a + d) % 5)};
      EXPECT_EQ(interpolate_value(v, s), v.values[g.index(a, 4 - a, d, (a + d) % 5)]);
    }
}

TEST(Interpolation, ReproducesMultilinearFunctions) {
  const auto v = affine_grid(small_setup());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 200; ++t) {
    const BinaryState s{u(rng), u(rng), u(rng), u(rng)};
    const double expect = 1.0 + 2.0 * s.x1 - 0.5 * s.x2 + 0.25 * s.y1 + 3.0 * s.y2 + s.x1 * s.y2;
    EXPECT_NEAR(interpolate_value(v, s), expect, 1e-12);
  }
}

TEST(Interpolation, ClampsOutsideDomain) {
  const auto v = affine_grid(small_setup());
  EXPECT_EQ(interpolate_value(v, {1.7, -0.2, -3.0, 0.4}), interpolate_value(v, {1.0, -0.2, -1.0, 0.4}));
  EXPECT_EQ(interpolate_value(v, {-1.2, 2.0, 0.1, 9.0}), interpolate_value(v, {-1.0, 1.0, 0.1, 1.0}));
}

TEST(AxisLocator, SnapsNearNodes) {
  const GridGeometry g{41, -1.0, 1.0};
  const AxisLocator loc(g);
  const auto s = loc(-0.5 + 1e-13);
  EXPECT_EQ(s.index, 10u);
  EXPECT_EQ(s.weight, 0.0);
  const auto last = loc(1.0);
  EXPECT_EQ(last.index, 39u);
  EXPECT_EQ(last.weight, 1.0);
}

TEST(ValueGridIo, RoundTripPreservesEverything) {
  auto v = affine_grid(small_setup());
  v.diagnostics = {3.5e-7, 12, true};
  const auto path = temp_file("roundtrip.bin");
  save_value_grid(path, v);
  const ValueGrid w = load_value_grid(path);
  EXPECT_EQ(w.setup, v.setup);
  EXPECT_EQ(w.values, v.values);
  EXPECT_EQ(w.diagnostics.residual, v.diagnostics.residual);
  EXPECT_EQ(w.diagnostics.iterations, 12);
  EXPECT_TRUE(w.diagnostics.converged);
  std::filesystem::remove(path);
}

TEST(ValueGridIo, RejectsCorruptFiles) {
  const auto path = temp_file("corrupt.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTAGRID-and-some-bytes";
  }
  EXPECT_THROW(load_value_grid(path), PersistFailure);

  save_value_grid(path, affine_grid(small_setup()));
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(load_value_grid(path), PersistFailure);
  std::filesystem::remove(path);
  EXPECT_THROW(load_value_grid(path), PersistFailure);
}

TEST(ValueGridIo, CompatibilityCheckNamesMismatch) {
  const auto v = ValueGrid::zeros(small_setup());
  EXPECT_NO_THROW(check_compatible(v, small_setup()));
  auto other = small_setup();
  other.cost.gamma = 2.0;
  try {
    check_compatible(v, other);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cost.gamma"), std::string::npos);
  }
  other = small_setup();
  other.kernels.fl = KernelSpec::BoundedConfidence(0.8);
  EXPECT_THROW(check_compatible(v, other), ValidationError);
  EXPECT_THROW(check_compatible(v, small_setup(9)), ValidationError);
}
