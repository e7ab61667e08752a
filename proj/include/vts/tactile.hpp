#pragma once

#include <optional>
#include <vector>

#include "vts/geometry.hpp"
#include "vts/image.hpp"
#include "vts/phantom.hpp"

namespace vts {

inline constexpr double kForceThresholdN = 3.0;
inline constexpr double kMaxTravelMm = 15.0;

// Simulated vision-based tactile sensor: a square gel window on the z=0 plane
// (normal +z), internally lit by three directional LEDs mapped to the R/G/B
// channels.
struct SensorConfig {
    double window_mm = 20.0;       // square sensing extent (~4 cm^2)
    int resolution = 256;          // output pixels per side
    double gel_stiffness = 0.05;   // N/mm per mm^2
    double led_elevation_deg = 45.0;
    std::array<double, 3> led_azimuth_deg = {0.0, 120.0, 240.0};
    double led_intensity = 0.65;
    double ambient = 0.25;
    double force_target = 3.0;     // N
    double smoothing_sigma_mm = 0.4;

    void check() const {
        if (force_target > kForceThresholdN)
            throw InvalidConfigError("SensorConfig: force_target exceeds 3 N");
        if (force_target <= 0)
            throw InvalidConfigError("SensorConfig: force_target must be > 0");
        if (resolution < 16)
            throw InvalidConfigError("SensorConfig: resolution below 16x16");
        if (window_mm <= 0)
            throw InvalidConfigError("SensorConfig: window must be positive");
    }

    double pitch() const { return window_mm / resolution; }
    Vec3 led_direction(int channel) const;
};

// Per-cell contact state at a given plunge depth. `gel` is the gel-side share
// of the penetration (what the camera sees), `penetration` the total overlap.
struct ContactField {
    int resolution = 0;
    std::vector<double> penetration;  // mm, >= 0
    std::vector<double> gel;          // mm, >= 0
    double force = 0.0;               // N
    double contact_fraction = 0.0;
};

// Precomputed pull-back of the sensor window onto the phantom: per-cell
// clearance (mm above the gel at zero plunge) and series-spring stiffness.
// Cells that map outside the phantom never make contact.
struct ContactMap {
    int resolution = 0;
    std::vector<double> clearance;  // +inf when off-phantom
    std::vector<double> k_tissue;
    double cell_area = 0.0;  // mm^2

    ContactField at_depth(double depth, double gel_stiffness) const;
    double force_at_depth(double depth, double gel_stiffness) const;
};

struct TactileFrame {
    std::vector<double> deformation;  // smoothed gel-side field, mm
    ImageU8 image;
    double achieved_force = 0.0;
    RigidTransform pose_used;  // phantom -> sensor
    double contact_fraction = 0.0;
    double depth = 0.0;  // plunge at settle
};

// Builds the window-to-phantom contact map for a pose (phantom -> sensor).
ContactMap build_contact_map(const PhantomSpec& spec, const RigidTransform& pose,
                             const SensorConfig& cfg);

struct ContactSolution {
    ContactField field;
    double depth = 0.0;
};

// Bisection on the monotone force-depth curve until the force lands in
// [0.98, 1.0] x force_target (<= 60 iterations). Empty optional when the
// travel limit cannot produce that force (collection resamples the pose).
std::optional<ContactSolution> settle_contact(const PhantomSpec& spec,
                                              const RigidTransform& pose,
                                              const SensorConfig& cfg);

// Photometric shading of a deformation field: per-pixel normals from central
// differences, channel c = clamp01(ambient + intensity * max(0, n . l_c)).
ImageU8 render_image(const std::vector<double>& deformation, int resolution,
                     const SensorConfig& cfg);

// Gaussian smoothing approximating membrane continuity (sigma in mm).
std::vector<double> smooth_field(const std::vector<double>& field,
                                 int resolution, double sigma_mm,
                                 double pitch_mm);

// settle + smooth + render. Empty optional on no contact.
std::optional<TactileFrame> capture(const PhantomSpec& spec,
                                    const RigidTransform& pose,
                                    const SensorConfig& cfg);

}  // namespace vts
