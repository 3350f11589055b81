#include "vxae/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>

#include "vxae/binvox.hpp"
#include "vxae/errors.hpp"
#include "vxae/log.hpp"
#include "vxae/rng.hpp"
#include "vxae/stl.hpp"

namespace vxae {

namespace {

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

const char* split_name(Split split) { return split == Split::Train ? "train" : "test"; }

std::vector<std::size_t> DatasetIndex::ids(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == split) out.push_back(i);
  return out;
}

DatasetIndex build_index(const std::filesystem::path& root, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw std::invalid_argument("test fraction must lie in [0, 1]");
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) throw DataError("dataset root is not a directory: " + root.string());
  std::vector<std::filesystem::path> files;
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec); !ec && it != std::filesystem::end(it);
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto ext = lower_extension(it->path());
    if (ext == ".stl" || ext == ".binvox") files.push_back(it->path());
  }
  if (ec) throw DataError("cannot scan dataset root " + root.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  Rng rng(splitmix64(seed ^ 0x5eedda7a5e7ull));
  rng.shuffle(files);

  DatasetIndex index;
  index.root = root;
  index.test_fraction = test_fraction;
  index.seed = seed;
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(files.size())));
  for (std::size_t i = 0; i < files.size(); ++i)
    index.entries.push_back({files[i], i < n_test ? Split::Test : Split::Train});
  return index;
}

VoxelGrid load_grid(const std::filesystem::path& path, int dim, const VoxelizeOptions& options) {
  const auto ext = lower_extension(path);
  if (ext == ".stl") return voxelize(read_stl_file(path), dim, options);
  if (ext != ".binvox") throw DataError("unsupported file type: " + path.string());
  VoxelGrid grid = read_binvox_file(path);
  if (grid.dim == dim) return grid;
  if (grid.dim > dim && grid.dim % dim == 0) return downsample(grid, grid.dim / dim);
  throw DataError(path.string() + ": binvox dim " + std::to_string(grid.dim) + " cannot be reduced to " +
                  std::to_string(dim));
}

Tensor<float> grids_to_tensor(std::span<const VoxelGrid* const> grids) {
  if (grids.empty()) throw DataError("cannot build an empty batch");
  const int dim = grids.front()->dim;
  const std::size_t cells = static_cast<std::size_t>(dim) * dim * dim;
  std::vector<float> values(grids.size() * cells);
  for (std::size_t n = 0; n < grids.size(); ++n) {
    if (grids[n]->dim != dim) throw ShapeError("batch mixes grid resolutions");
    std::transform(grids[n]->occupancy.begin(), grids[n]->occupancy.end(), values.begin() + n * cells,
                   [](std::uint8_t v) { return v ? 1.0f : 0.0f; });
  }
  return Tensor<float>::from_values({static_cast<std::int64_t>(grids.size()), 1, dim, dim, dim}, std::move(values));
}

Tensor<float> load_batch(const DatasetIndex& index, std::span<const std::size_t> ids, int dim) {
  std::vector<VoxelGrid> grids;
  grids.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id >= index.entries.size()) throw std::out_of_range("dataset id " + std::to_string(id) + " out of range");
    grids.push_back(load_grid(index.entries[id].path, dim));
  }
  std::vector<const VoxelGrid*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  return grids_to_tensor(ptrs);
}

Dataset::Dataset(DatasetIndex index, int dim, const VoxelizeOptions& options)
    : index_(std::move(index)), dim_(dim), grids_(index_.entries.size()) {
  const auto n = static_cast<std::int64_t>(grids_.size());
  std::vector<std::string> errors(grids_.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      grids_[i] = load_grid(index_.entries[i].path, dim_, options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < grids_.size(); ++i) {
    if (!grids_[i]) {
      ++skipped_;
      log::warn("skipping ", index_.entries[i].path.string(), ": ", errors[i]);
      continue;
    }
    (index_.entries[i].split == Split::Train ? train_ : test_).push_back(i);
  }
}

const VoxelGrid& Dataset::grid(std::size_t id) const {
  if (id >= grids_.size() || !grids_[id]) throw std::out_of_range("dataset id " + std::to_string(id) + " not loaded");
  return *grids_[id];
}

Tensor<float> Dataset::batch(std::span<const std::size_t> ids) const {
  std::vector<const VoxelGrid*> ptrs;
  ptrs.reserve(ids.size());
  for (std::size_t id : ids) ptrs.push_back(&grid(id));
  return grids_to_tensor(ptrs);
}

}  // namespace vxae
