#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "vxae/binvox.hpp"
#include "vxae/dataset.hpp"
#include "vxae/errors.hpp"
#include "vxae/rng.hpp"
#include "vxae/stl.hpp"
#include "vxae/synthetic.hpp"
#include "vxae/voxelize.hpp"

namespace vxae {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vxae_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

VoxelGrid random_grid(int dim, double p, Rng& rng) {
  VoxelGrid g(dim);
  for (auto& v : g.occupancy) v = rng.uniform() < p ? 1 : 0;
  return g;
}

// --- STL ---

TEST(Stl, BinaryRoundTripIsExact) {
  auto mesh = make_icosphere(2, 1.7, {0.1, -3.0, 2.5});
  const auto bytes = write_stl_binary(mesh);
  EXPECT_EQ(bytes.size(), 84 + 50 * mesh.size());
  const auto back = parse_stl(bytes);
  ASSERT_EQ(back.size(), mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    EXPECT_EQ(back.triangles[i].vertices, mesh.triangles[i].vertices);
    EXPECT_EQ(back.triangles[i].normal, mesh.triangles[i].normal);
  }
}

TEST(Stl, AsciiRoundTripIsExact) {
  Rng rng(9);
  TriangleMesh mesh;
  for (int i = 0; i < 50; ++i) {
    Triangle t;
    for (auto& v : t.vertices)
      for (auto& c : v) c = static_cast<float>((rng.uniform() - 0.5) * std::pow(10.0, rng.below(12) - 6.0));
    mesh.triangles.push_back(t);
  }
  recompute_normals(mesh);
  const auto text = write_stl_ascii(mesh, "part");
  const auto back = parse_stl(to_bytes(text));
  ASSERT_EQ(back.size(), mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) EXPECT_EQ(back.triangles[i].vertices, mesh.triangles[i].vertices);
}

TEST(Stl, BinaryHeaderStartingWithSolidIsStillBinary) {
  auto mesh = make_box({0, 0, 0}, {1, 2, 3});
  const auto bytes = write_stl_binary(mesh, "solid looking header");
  EXPECT_NE(std::string(bytes.begin(), bytes.begin() + 5), "solid");
  EXPECT_EQ(parse_stl(bytes).size(), 12u);
  // A third-party file whose header does start with "solid" falls back to binary.
  auto raw = bytes;
  std::copy_n("solid", 5, raw.begin());
  EXPECT_EQ(parse_stl(raw).size(), 12u);
}

TEST(Stl, AsciiErrorsCarryLineNumbers) {
  const std::string text =
      "solid x\n"
      "  facet normal 0 0 1\n"
      "    outer loop\n"
      "      vertex 0 0 0\n"
      "      vertex 1 zero 0\n";
  try {
    parse_stl(to_bytes(text));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_TRUE(e.is_line());
    EXPECT_EQ(e.location(), 5u);
  }
}

TEST(Stl, TruncatedBinaryReportsOffset) {
  auto bytes = write_stl_binary(make_box({0, 0, 0}, {1, 1, 1}));
  bytes.resize(bytes.size() - 20);
  try {
    parse_stl(bytes);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_FALSE(e.is_line());
    EXPECT_EQ(e.location(), 84u + 11 * 50);
  }
  EXPECT_THROW(parse_stl(Bytes(40, 0)), ParseError);
}

TEST(Stl, NonFiniteCoordinatesRejected) {
  auto mesh = make_box({0, 0, 0}, {1, 1, 1});
  mesh.triangles[3].vertices[1][2] = std::nanf("");
  EXPECT_THROW(parse_stl(write_stl_binary(mesh)), ParseError);
}

TEST(Stl, EmptyBinaryParses) {
  EXPECT_TRUE(parse_stl(write_stl_binary(TriangleMesh{})).empty());
}

// --- binvox ---

TEST(Binvox, KnownByteLayout) {
  VoxelGrid g(2);
  g.set(0, 1, 0, true);  // file index x*4 + z*2 + y = 1
  g.set(1, 0, 1, true);  // 4 + 2 + 0 = 6
  const auto bytes = write_binvox(g);
  const std::string s(bytes.begin(), bytes.end());
  const auto data = s.find("data\n");
  ASSERT_NE(data, std::string::npos);
  EXPECT_EQ(s.rfind("#binvox 1\ndim 2 2 2\n", 0), 0u);
  const std::string body = s.substr(data + 5);
  const std::string expected{0, 1, 1, 1, 0, 4, 1, 1, 0, 1};
  EXPECT_EQ(body, expected);
}

TEST(Binvox, RunsSplitAt255) {
  VoxelGrid g(8);
  std::fill(g.occupancy.begin(), g.occupancy.end(), 1);
  const auto bytes = write_binvox(g);
  const std::string s(bytes.begin(), bytes.end());
  const std::string body = s.substr(s.find("data\n") + 5);
  EXPECT_EQ(body, std::string({1, char(255), 1, char(255), 1, 2}));
}

TEST(Binvox, RandomRoundTrips) {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    auto g = random_grid(1 + static_cast<int>(rng.below(20)), rng.uniform(), rng);
    g.translate = {rng.normal(), rng.normal(), rng.normal()};
    g.scale = 0.1 + rng.uniform();
    const auto bytes = write_binvox(g);
    const auto back = read_binvox(bytes);
    EXPECT_EQ(back.occupancy, g.occupancy);
    EXPECT_EQ(back.translate, g.translate);
    EXPECT_EQ(back.scale, g.scale);
    EXPECT_EQ(write_binvox(back), bytes);
  }
}

TEST(Binvox, MalformedInputsRejected) {
  VoxelGrid g(4);
  g.set(1, 2, 3, true);
  const auto good = write_binvox(g);
  const std::string s(good.begin(), good.end());
  auto bad = [](std::string text) { return Bytes(text.begin(), text.end()); };
  EXPECT_THROW(read_binvox(bad("#binvox 2\n" + s.substr(s.find('\n') + 1))), FormatError);
  std::string noncubic = s;
  noncubic.replace(noncubic.find("dim 4 4 4"), 9, "dim 4 4 5");
  EXPECT_THROW(read_binvox(bad(noncubic)), FormatError);
  EXPECT_THROW(read_binvox(bad(s + std::string{0, 1})), FormatError);  // overrun
  EXPECT_THROW(read_binvox(bad(s.substr(0, s.size() - 2))), FormatError);  // underrun
  std::string zero = s;
  zero[zero.size() - 1] = 0;
  EXPECT_THROW(read_binvox(bad(zero)), FormatError);
  std::string value = s;
  value[value.size() - 2] = 2;
  EXPECT_THROW(read_binvox(bad(value)), FormatError);
}

TEST(Binvox, FileRoundTripAndAtomicWrite) {
  const auto dir = temp_dir("binvox_file");
  Rng rng(2);
  const auto g = random_grid(16, 0.3, rng);
  write_binvox_file(dir / "a.binvox", g);
  EXPECT_EQ(read_binvox_file(dir / "a.binvox"), g);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
}

// --- grids and dataset ---

TEST(VoxelGrid, DownsampleMajorityWithTies) {
  VoxelGrid g(4);
  // Block (0,0,0): 4 of 8 set -> tie -> occupied. Block (1,1,1): 3 of 8 -> empty.
  g.set(0, 0, 0, true);
  g.set(1, 0, 0, true);
  g.set(0, 1, 0, true);
  g.set(0, 0, 1, true);
  g.set(2, 2, 2, true);
  g.set(3, 2, 2, true);
  g.set(2, 3, 2, true);
  const auto d = downsample(g, 2);
  EXPECT_EQ(d.dim, 2);
  EXPECT_EQ(d.at(0, 0, 0), 1);
  EXPECT_EQ(d.at(1, 1, 1), 0);
  EXPECT_EQ(d.occupied_count(), 1u);
}

TEST(Dataset, SplitIsDisjointAndDeterministic) {
  const auto dir = temp_dir("dataset_split");
  write_synthetic_corpus(dir, 40, 8, 1);
  const auto a = build_index(dir, 0.25, 7), b = build_index(dir, 0.25, 7), c = build_index(dir, 0.25, 8);
  ASSERT_EQ(a.size(), 40u);
  EXPECT_EQ(a.ids(Split::Test).size(), 10u);
  EXPECT_EQ(a.ids(Split::Train).size(), 30u);
  auto test_paths = [](const DatasetIndex& idx) {
    std::vector<fs::path> out;
    for (auto id : idx.ids(Split::Test)) out.push_back(idx.entries[id].path);
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(test_paths(a), test_paths(b));
  EXPECT_NE(test_paths(a), test_paths(c));
  std::vector<bool> seen(40, false);
  for (auto s : {Split::Train, Split::Test})
    for (auto id : a.ids(s)) {
      EXPECT_FALSE(seen[id]);
      seen[id] = true;
    }
  EXPECT_THROW(build_index(dir / "missing", 0.2, 0), DataError);
}

TEST(Dataset, SkipsUnloadableFilesAndDownsamples) {
  const auto dir = temp_dir("dataset_skip");
  write_synthetic_corpus(dir, 3, 16, 4);
  std::ofstream(dir / "broken.stl") << "solid nope\n facet oops\n";
  std::ofstream(dir / "notes.txt") << "ignored";
  Dataset data(build_index(dir, 0.0, 0), 8);
  EXPECT_EQ(data.index().size(), 4u);
  EXPECT_EQ(data.skipped(), 1u);
  EXPECT_EQ(data.ids(Split::Train).size(), 3u);
  const auto batch = data.batch(data.ids(Split::Train));
  EXPECT_EQ(batch.shape(), (Shape{3, 1, 8, 8, 8}));
  EXPECT_THROW(load_grid(dir / "shape_0000.binvox", 5), DataError);
}

TEST(Dataset, TensorLayoutMatchesGridIndex) {
  VoxelGrid g(3);
  g.set(2, 0, 1, true);
  const VoxelGrid* ptrs[] = {&g};
  const auto t = grids_to_tensor(ptrs);
  EXPECT_EQ(t.values()[(2 * 3 + 0) * 3 + 1], 1.0f);
  EXPECT_EQ(std::count(t.values().begin(), t.values().end(), 1.0f), 1);
}

TEST(Synthetic, CorpusIsReproducibleAndNonTrivial) {
  const auto a = temp_dir("synth_a"), b = temp_dir("synth_b");
  const auto pa = write_synthetic_corpus(a, 10, 16, 3);
  write_synthetic_corpus(b, 10, 16, 3);
  ASSERT_EQ(pa.size(), 10u);
  for (const auto& p : pa) {
    const auto ga = read_binvox_file(p);
    EXPECT_EQ(ga, read_binvox_file(b / p.filename()));
    EXPECT_GT(ga.occupied_fraction(), 0.01) << p;
    EXPECT_LT(ga.occupied_fraction(), 0.9) << p;
  }
  Rng rng(1);
  for (auto kind : {PrimitiveKind::Box, PrimitiveKind::Sphere, PrimitiveKind::Cylinder, PrimitiveKind::Torus,
                    PrimitiveKind::BoxPair})
    EXPECT_TRUE(is_watertight(random_primitive(kind, rng))) << static_cast<int>(kind);
}

}  // namespace
}  // namespace vxae
