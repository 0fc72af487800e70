#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "arl/trajectory.hpp"

// Pairwise attack matrix over equal-length trajectories. Entry (i, j) of the
// row-major n x n result is 1 when some step index has the two states further
// apart than delta. The serial version is the reference the parallel one is
// tested against.
namespace arl::kernels {

bool stepwise_exceeds(const Trajectory& a, const Trajectory& b, double delta);

namespace serial {
std::vector<std::uint8_t> attack_matrix(std::span<const Trajectory> trajectories, double delta);
}

namespace parallel {
std::vector<std::uint8_t> attack_matrix(std::span<const Trajectory> trajectories, double delta);
}

}  // namespace arl::kernels
