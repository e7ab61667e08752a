#include "vts/tactile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vts {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

Vec3 SensorConfig::led_direction(int channel) const {
    double az = led_azimuth_deg[channel] * kPi / 180.0;
    double el = led_elevation_deg * kPi / 180.0;
    return Vec3{std::cos(az) * std::cos(el), std::sin(az) * std::cos(el),
                std::sin(el)}
        .normalized();
}

ContactMap build_contact_map(const PhantomSpec& spec, const RigidTransform& pose,
                             const SensorConfig& cfg) {
    cfg.check();
    const int res = cfg.resolution;
    ContactMap map;
    map.resolution = res;
    map.clearance.assign(static_cast<std::size_t>(res) * res, kInf);
    map.k_tissue.assign(static_cast<std::size_t>(res) * res, 0.0);
    map.cell_area = cfg.pitch() * cfg.pitch();

    const RigidTransform inv_pose = invert(pose);
    const double half = 0.5 * cfg.window_mm;
    const double pitch = cfg.pitch();

    for (int r = 0; r < res; ++r) {
        for (int c = 0; c < res; ++c) {
            // Cell centers span the window symmetrically about the origin.
            double x = -half + (c + 0.5) * pitch;
            double y = -half + (r + 0.5) * pitch;
            // Pull the cell back through the pose to find which phantom
            // column sits above it, then push the surface point forward to
            // read its height over the gel plane.
            Vec3 q = inv_pose.apply({x, y, 0.0});
            if (q.x < 0.0 || q.x > kPhantomExtentMm || q.y < 0.0 ||
                q.y > kPhantomExtentMm)
                continue;
            auto [h, k] = sample_field(spec, q.x, q.y);
            Vec3 surface = pose.apply({q.x, q.y, h});
            std::size_t i = static_cast<std::size_t>(r) * res + c;
            map.clearance[i] = surface.z;
            map.k_tissue[i] = k;
        }
    }
    return map;
}

double ContactMap::force_at_depth(double depth, double gel_stiffness) const {
    double force = 0.0;
    const std::size_t n = clearance.size();
    for (std::size_t i = 0; i < n; ++i) {
        double pen = depth - clearance[i];
        if (pen <= 0.0) continue;
        double kt = k_tissue[i];
        double keff = kt * gel_stiffness / (kt + gel_stiffness);
        force += keff * pen * cell_area;
    }
    return force;
}

ContactField ContactMap::at_depth(double depth, double gel_stiffness) const {
    ContactField f;
    f.resolution = resolution;
    const std::size_t n = clearance.size();
    f.penetration.assign(n, 0.0);
    f.gel.assign(n, 0.0);
    std::size_t contacts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double pen = depth - clearance[i];
        if (pen <= 0.0) continue;
        double kt = k_tissue[i];
        f.penetration[i] = pen;
        // Series springs: the gel takes the tissue-weighted share, so stiff
        // tumor regions dent the gel more deeply at equal penetration.
        f.gel[i] = pen * kt / (kt + gel_stiffness);
        f.force += kt * gel_stiffness / (kt + gel_stiffness) * pen * cell_area;
        ++contacts;
    }
    f.contact_fraction = static_cast<double>(contacts) / static_cast<double>(n);
    return f;
}

std::optional<ContactSolution> settle_contact(const PhantomSpec& spec,
                                              const RigidTransform& pose,
                                              const SensorConfig& cfg) {
    cfg.check();
    ContactMap map = build_contact_map(spec, pose, cfg);

    const double target = cfg.force_target;
    const double band_lo = 0.98 * target;
    if (map.force_at_depth(kMaxTravelMm, cfg.gel_stiffness) < band_lo)
        return std::nullopt;  // never touches, or too weak within travel

    double lo = 0.0, hi = kMaxTravelMm;
    double depth = hi;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double f = map.force_at_depth(mid, cfg.gel_stiffness);
        if (f > target) {
            hi = mid;
        } else if (f < band_lo) {
            lo = mid;
        } else {
            depth = mid;
            break;
        }
        depth = hi;
    }

    ContactSolution sol;
    sol.depth = depth;
    sol.field = map.at_depth(depth, cfg.gel_stiffness);
    if (sol.field.force < band_lo || sol.field.force > target * (1.0 + 1e-3))
        return std::nullopt;  // bisection could not land in the band
    return sol;
}

std::vector<double> smooth_field(const std::vector<double>& field,
                                 int resolution, double sigma_mm,
                                 double pitch_mm) {
    if (sigma_mm <= 0.0) return field;
    double sigma_px = sigma_mm / pitch_mm;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
    radius = std::min(radius, resolution - 1);

    std::vector<double> kernel(static_cast<std::size_t>(radius) * 2 + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-0.5 * (i / sigma_px) * (i / sigma_px));
        kernel[i + radius] = w;
        sum += w;
    }
    for (auto& w : kernel) w /= sum;

    auto pass = [&](const std::vector<double>& src, bool horizontal) {
        std::vector<double> dst(src.size(), 0.0);
        for (int r = 0; r < resolution; ++r)
            for (int c = 0; c < resolution; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int rr = r, cc = c;
                    if (horizontal)
                        cc = std::clamp(c + k, 0, resolution - 1);
                    else
                        rr = std::clamp(r + k, 0, resolution - 1);
                    acc += kernel[k + radius] *
                           src[static_cast<std::size_t>(rr) * resolution + cc];
                }
                dst[static_cast<std::size_t>(r) * resolution + c] = acc;
            }
        return dst;
    };
    return pass(pass(field, true), false);
}

ImageU8 render_image(const std::vector<double>& deformation, int resolution,
                     const SensorConfig& cfg) {
    ImageU8 img(resolution, resolution);
    const double pitch = cfg.pitch();
    const Vec3 leds[3] = {cfg.led_direction(0), cfg.led_direction(1),
                          cfg.led_direction(2)};

    auto at = [&](int r, int c) {
        return deformation[static_cast<std::size_t>(r) * resolution + c];
    };

    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            // Central differences inside, one-sided at the boundary.
            int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, resolution - 1);
            int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, resolution - 1);
            double gx = (at(r, c1) - at(r, c0)) / ((c1 - c0) * pitch);
            double gy = (at(r1, c) - at(r0, c)) / ((r1 - r0) * pitch);
            Vec3 n = Vec3{-gx, -gy, 1.0}.normalized();
            for (int ch = 0; ch < 3; ++ch) {
                double shade = cfg.ambient +
                               cfg.led_intensity * std::max(0.0, n.dot(leds[ch]));
                shade = std::clamp(shade, 0.0, 1.0);
                img.at(r, c, ch) =
                    static_cast<std::uint8_t>(std::floor(shade * 255.0 + 0.5));
            }
        }
    }
    return img;
}

std::optional<TactileFrame> capture(const PhantomSpec& spec,
                                    const RigidTransform& pose,
                                    const SensorConfig& cfg) {
    auto sol = settle_contact(spec, pose, cfg);
    if (!sol) return std::nullopt;

    TactileFrame frame;
    frame.pose_used = pose;
    frame.achieved_force = sol->field.force;
    frame.contact_fraction = sol->field.contact_fraction;
    frame.depth = sol->depth;
    frame.deformation = smooth_field(sol->field.gel, cfg.resolution,
                                     cfg.smoothing_sigma_mm, cfg.pitch());
    frame.image = render_image(frame.deformation, cfg.resolution, cfg);
    return frame;
}

}  // namespace vts
