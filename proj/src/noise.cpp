#include "vts/noise.hpp"

#include <algorithm>
#include <cmath>

namespace vts {

namespace {

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

ValueNoise2D::ValueNoise2D(std::uint64_t seed, int base_cells, int octaves) {
    double weight = 1.0;
    for (int o = 0; o < octaves; ++o) {
        Octave oct;
        oct.cells = base_cells << o;
        oct.weight = weight;
        Rng rng(derive_seed(seed, std::uint64_t(o)));
        oct.lattice.resize(static_cast<std::size_t>(oct.cells + 1) *
                           (oct.cells + 1));
        for (auto& v : oct.lattice) v = rng.uniform(-1.0, 1.0);
        octaves_.push_back(std::move(oct));
        weight *= 0.5;
    }
}

double ValueNoise2D::sample(double x, double y) const {
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    double total = 0.0;
    for (const auto& oct : octaves_) {
        double gx = x * oct.cells;
        double gy = y * oct.cells;
        int ix = std::min(static_cast<int>(gx), oct.cells - 1);
        int iy = std::min(static_cast<int>(gy), oct.cells - 1);
        double tx = smooth(gx - ix);
        double ty = smooth(gy - iy);
        auto at = [&](int i, int j) {
            return oct.lattice[static_cast<std::size_t>(j) * (oct.cells + 1) + i];
        };
        double a = at(ix, iy) * (1 - tx) + at(ix + 1, iy) * tx;
        double b = at(ix, iy + 1) * (1 - tx) + at(ix + 1, iy + 1) * tx;
        total += oct.weight * (a * (1 - ty) + b * ty);
    }
    return total;
}

PeriodicNoise1D::PeriodicNoise1D(std::uint64_t seed, int harmonics) {
    Rng rng(seed);
    for (int k = 0; k < harmonics; ++k) {
        amp_.push_back(rng.uniform(0.4, 1.0));
        freq_.push_back(static_cast<double>(rng.uniform_int(1, 4)));
        phase_.push_back(rng.uniform(0.0, 6.283185307179586));
    }
    // Min-max normalize over a dense period so both extremes are attained.
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 2048; ++i) {
        double th = 6.283185307179586 * i / 2048.0;
        double raw = 0.0;
        for (std::size_t k = 0; k < amp_.size(); ++k)
            raw += amp_[k] * std::sin(freq_[k] * th + phase_[k]);
        lo = std::min(lo, raw);
        hi = std::max(hi, raw);
    }
    offset_ = 0.5 * (hi + lo);
    scale_ = hi - lo > 1e-12 ? 2.0 / (hi - lo) : 1.0;
}

double PeriodicNoise1D::sample(double theta) const {
    double raw = 0.0;
    for (std::size_t k = 0; k < amp_.size(); ++k)
        raw += amp_[k] * std::sin(freq_[k] * theta + phase_[k]);
    return std::clamp((raw - offset_) * scale_, -1.0, 1.0);
}

}  // namespace vts
