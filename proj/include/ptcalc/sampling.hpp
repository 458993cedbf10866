#pragma once

#include <array>
#include <vector>

namespace ptcalc {

/// Radical-inverse (van der Corput) value of index i in the given base.
double radical_inverse(unsigned base, unsigned long long i);

/// Deterministic low-discrepancy (Halton) points inside the box, inset 2% from
/// the boundary. The seed offsets the sequence start, so (count, seed) fully
/// determines the set.
std::vector<std::vector<double>> sample_points(const std::vector<std::array<double, 2>>& box,
                                               int count, unsigned seed);

} // namespace ptcalc
