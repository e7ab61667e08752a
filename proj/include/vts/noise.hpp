#pragma once

#include <vector>

#include "vts/common.hpp"

namespace vts {

// Seeded value noise on a coarse lattice with smoothstep interpolation,
// summed over a few octaves. Smooth, cheap, fully deterministic.
class ValueNoise2D {
public:
    ValueNoise2D(std::uint64_t seed, int base_cells, int octaves);

    // x, y in [0, 1]; roughly in [-1, 1] before normalization
    double sample(double x, double y) const;

private:
    struct Octave {
        int cells;
        double weight;
        std::vector<double> lattice;  // (cells+1)^2 values in [-1, 1]
    };
    std::vector<Octave> octaves_;
};

// Periodic 1D noise: a short stack of seeded harmonics, min-max normalized so
// the returned values attain both -1 and +1 over a full period.
class PeriodicNoise1D {
public:
    explicit PeriodicNoise1D(std::uint64_t seed, int harmonics = 3);

    double sample(double theta) const;  // theta in radians, result in [-1, 1]

private:
    std::vector<double> amp_, freq_, phase_;
    double offset_ = 0.0;
    double scale_ = 1.0;
};

}  // namespace vts
