#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctroi/volume.hpp"

namespace ctroi {

// 8-bit grayscale PNG, pixel rows top to bottom.
void write_png_gray8(const std::string& path, int width, int height,
                     const std::vector<std::uint8_t>& pixels);

struct SliceExport {
  std::string axial, coronal, sagittal;
};

// Writes the three mid-planes of v as <stem>_axial.png, <stem>_coronal.png,
// <stem>_sagittal.png with linear windowing [lo, hi] -> [0, 255]. Pass
// hi <= lo to window on the volume's own value range.
SliceExport write_mid_slices(const VoxelVolume& v, const std::string& stem,
                             double lo = 0.0, double hi = 0.0);

// CSV with a header row; every row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Intensity profile along x through the volume center (j = k = n/2):
// columns index, x, value.
void write_profile_csv(const VoxelVolume& v, const std::string& path);

}  // namespace ctroi
