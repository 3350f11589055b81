#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vxae/tensor.hpp"
#include "vxae/voxel_grid.hpp"
#include "vxae/voxelize.hpp"

namespace vxae {

enum class Split { Train, Test };

const char* split_name(Split split);

struct DatasetEntry {
  std::filesystem::path path;
  Split split = Split::Train;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<DatasetEntry> entries;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> ids(Split split) const;
  std::size_t size() const { return entries.size(); }
};

// Scans `root` recursively for *.stl and *.binvox files, orders them by path and
// shuffles with `seed`. The first round(test_fraction * n) shuffled entries form the
// test split. Throws DataError when root is not a directory.
DatasetIndex build_index(const std::filesystem::path& root, double test_fraction, std::uint64_t seed);

// Reads one grid at resolution `dim`. binvox files must have dim equal to or an integer
// multiple of `dim` (majority downsampling); STL files are voxelized.
VoxelGrid load_grid(const std::filesystem::path& path, int dim, const VoxelizeOptions& options = {});

// [N,1,dim,dim,dim] tensor of 0/1 occupancies, one sample per id, in the order given.
Tensor<float> load_batch(const DatasetIndex& index, std::span<const std::size_t> ids, int dim);

Tensor<float> grids_to_tensor(std::span<const VoxelGrid* const> grids);

// Index plus decoded grids held in memory. Entries that fail to load are skipped
// with a warning and counted.
class Dataset {
 public:
  Dataset(DatasetIndex index, int dim, const VoxelizeOptions& options = {});

  const DatasetIndex& index() const { return index_; }
  int dim() const { return dim_; }
  // Loadable entries of one split, as indices into index().entries.
  const std::vector<std::size_t>& ids(Split split) const { return split == Split::Train ? train_ : test_; }
  std::size_t skipped() const { return skipped_; }
  const VoxelGrid& grid(std::size_t id) const;
  Tensor<float> batch(std::span<const std::size_t> ids) const;

 private:
  DatasetIndex index_;
  int dim_;
  std::vector<std::optional<VoxelGrid>> grids_;
  std::vector<std::size_t> train_, test_;
  std::size_t skipped_ = 0;
};

}  // namespace vxae
