#pragma once

#include <cstdint>
#include <vector>

#include "condbohm/field.hpp"

namespace condbohm {

/// Independent stream seed for ensemble member `index` (splitmix64 over the
/// pair), so members can be drawn in any order or in parallel.
std::uint64_t member_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Draws n points distributed as |psi|^2 (bicubic-interpolated) by rejection
/// against a uniform proposal over the grid domain. The envelope is
/// 1.3 max|psi|^2 on grid points, which covers interpolation overshoot.
/// Member k uses its own generator seeded with member_seed(seed, k).
std::vector<Point2> sample_ensemble(const ComplexField2D& psi, std::size_t n, std::uint64_t seed);

}  // namespace condbohm
