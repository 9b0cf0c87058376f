#pragma once

#include <cstdint>
#include <string>

#include "microelast/material.hpp"

namespace microelast {

/// PGM loader (P2 ASCII or P5 binary, maxval <= 65535; two-byte P5
/// samples are big-endian). Values are normalized to [0, 1], row-major
/// with the top row first. Malformed input faults with the byte offset.
VoxelGrid load_grayscale_pgm(const std::string& path);

void save_pgm(const VoxelGrid& grid, const std::string& path,
              bool binary = false, int maxval = 255);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), symmetric
/// reflection at the edges (index -1 maps back to 0).
VoxelGrid gaussian_filter(const VoxelGrid& grid, double sigma_px);

/// Threshold to {0, 1}: value >= threshold maps to 1.
VoxelGrid binarize(const VoxelGrid& grid, double threshold);

struct FiberFixtureOptions {
    int width = 64, height = 64;
    int n_fibers = 40;
    double min_length_px = 6, max_length_px = 16;
    double thickness_px = 1.5;
    std::uint64_t seed = 0;
};

/// Seeded random short-fiber pattern: capsule-shaped inclusions
/// (value 1) on a matrix background (value 0).
VoxelGrid synthetic_fiber_grid(const FiberFixtureOptions& opts);

}  // namespace microelast
