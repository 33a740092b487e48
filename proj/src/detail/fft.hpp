#pragma once

#include <span>

#include "wienerlab/aligned.hpp"

namespace wienerlab::detail {

enum class Direction { forward, backward };

/// Unnormalized in-place DFT over a dim-dimensional cube of side n.
/// Plans are cached per shape; execution is safe from several threads.
void dft_cube(int dim, int n, Direction dir, std::span<Complex> data);

/// `howmany` interleaved 1-D transforms of length n: element k of series s
/// lives at data[k * howmany + s]. Used for the time axis of frame stacks.
void dft_strided(int n, int howmany, Direction dir, std::span<Complex> data);

}  // namespace wienerlab::detail
