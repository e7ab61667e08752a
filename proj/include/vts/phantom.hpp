#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "vts/common.hpp"

namespace vts {

// Borrmann morphological classes of advanced gastric tumors.
enum class Borrmann { I, II, III, IV };

std::string to_string(Borrmann c);
Borrmann borrmann_from_string(const std::string& s);
inline constexpr std::array<Borrmann, 4> kAllClasses = {
    Borrmann::I, Borrmann::II, Borrmann::III, Borrmann::IV};

// Material constants. The printed phantoms contrast a soft healthy matrix
// (Shore A 1-2) against a stiffer tumor blend (Shore A 30-40); here that
// becomes a fixed 10x contact-stiffness contrast.
inline constexpr double kHealthyStiffness = 0.02;  // N/mm per mm^2
inline constexpr double kTumorStiffness = 0.20;    // N/mm per mm^2
inline constexpr double kPhantomExtentMm = 30.0;   // working area 30 x 30 mm
inline constexpr double kBaseLayerMm = 1.5;
inline constexpr double kMaxHeightMm = 12.0;

// One synthetic tumor phantom: height and contact-stiffness fields sampled on
// a uniform node-centered grid over the 30 x 30 mm working area.
struct PhantomSpec {
    std::string phantom_id;
    Borrmann borrmann_class = Borrmann::I;
    std::uint64_t seed = 0;
    int rows = 128;
    int cols = 128;
    std::vector<double> height;     // mm above backplate, row-major
    std::vector<double> stiffness;  // N/mm per mm^2, row-major
    std::map<std::string, double> params;

    double pitch_x() const { return kPhantomExtentMm / (cols - 1); }
    double pitch_y() const { return kPhantomExtentMm / (rows - 1); }

    double height_at(int r, int c) const {
        return height[static_cast<std::size_t>(r) * cols + c];
    }
    double stiffness_at(int r, int c) const {
        return stiffness[static_cast<std::size_t>(r) * cols + c];
    }
};

// Deterministic per (class, seed). Grid size is a simulator knob, default 128.
PhantomSpec generate_phantom(Borrmann cls, std::uint64_t seed,
                             int grid_size = 128);

// Bilinear lookup of (height, stiffness) at (x, y) mm; exact at grid nodes.
// Throws OutOfBoundsError outside [0, 30]^2.
std::pair<double, double> sample_field(const PhantomSpec& spec, double x,
                                       double y);

// The full 44-phantom corpus: 11 variations of each class, ids "I-00".."IV-10",
// per-phantom seed derived from (master_seed, class, index).
std::vector<PhantomSpec> build_phantom_bank(std::uint64_t master_seed,
                                            int grid_size = 128,
                                            int per_class = 11);

// Persistence: JSON header next to two row-major float32 little-endian blobs.
void save_phantom(const PhantomSpec& spec, const std::string& dir);
PhantomSpec load_phantom(const std::string& dir, const std::string& phantom_id);

}  // namespace vts
