#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "amalgam/atoms.hpp"
#include "amalgam/grid.hpp"

namespace amalgam::lab {

using Rng = std::mt19937_64;

/// Independent stream for one named experiment, so adding draws to one
/// corpus leaves the others unchanged.
Rng stream(std::uint64_t seed, const std::string& name);

/// 1 to 4 smooth bumps of radius 0.3 to 1.5 with random signs and
/// amplitudes, times a slowly varying factor, clear of the margin.
Field smooth_field(const GridSpec& g, Rng& rng);

/// Piecewise random cell values on a random set of lattice cubes, with
/// cube magnitudes spread over six decades.
Field rough_field(const GridSpec& g, Rng& rng, bool nonneg = false);

/// Dyadic side in [lo, hi], uniform in the exponent.
double dyadic_side(Rng& rng, double lo, double hi);

/// Cube of the given side with a grid-aligned corner, inside the margin.
Cube random_cube(const GridSpec& g, Rng& rng, double side);

Atom random_atom(const GridSpec& g, Rng& rng, const Cube& cube, const AtomConfig& cfg);

/// Global polynomial of total degree `degree` with O(1) coefficients in the
/// scaled variable x / L.
Field random_polynomial(const GridSpec& g, Rng& rng, int degree);

}  // namespace amalgam::lab
