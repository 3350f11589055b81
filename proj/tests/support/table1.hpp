#pragma once

#include <string>
#include <vector>

namespace vxae::testing {

// Encoder rows of the baseline architecture table: repetitions, layer, output shape
// (side, channels). The final dropout row prints 6 channels; it follows a 4-channel
// convolution and dropout keeps shape, so the comparison uses 4.
struct Table1Row {
  int reps;
  std::string layer;
  int side;
  int channels;
};

inline const std::vector<Table1Row>& table1_rows() {
  static const std::vector<Table1Row> rows = {
      {3, "Conv3D", 64, 4},   {1, "MaxPool3D", 32, 4}, {1, "Dropout", 32, 4},   {2, "Conv3D", 32, 8},
      {1, "MaxPool3D", 16, 8}, {1, "Conv3D", 16, 8},   {1, "Conv3D", 16, 16},  {1, "MaxPool3D", 8, 16},
      {2, "Conv3D", 8, 32},   {1, "MaxPool3D", 4, 32}, {5, "Conv3D", 4, 32},   {1, "Conv3D", 4, 4},
      {1, "Dropout", 4, 4},
  };
  return rows;
}

}  // namespace vxae::testing
