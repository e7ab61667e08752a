#include "vts/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vts/noise.hpp"

namespace vts {

std::string to_string(Borrmann c) {
    switch (c) {
        case Borrmann::I: return "I";
        case Borrmann::II: return "II";
        case Borrmann::III: return "III";
        case Borrmann::IV: return "IV";
    }
    throw InvalidConfigError("to_string: bad Borrmann value");
}

Borrmann borrmann_from_string(const std::string& s) {
    if (s == "I") return Borrmann::I;
    if (s == "II") return Borrmann::II;
    if (s == "III") return Borrmann::III;
    if (s == "IV") return Borrmann::IV;
    throw UnknownClassLabelError("borrmann_from_string: '" + s + "'");
}

namespace {

double smoothstep(double edge0, double edge1, double x) {
    double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// 80% decay over `dist` mm: exp(-(dist/sigma)^2) = 0.2
double sigma_for_decay(double dist) { return dist / std::sqrt(std::log(5.0)); }

struct Bump {
    double cx, cy, height, radius, exponent;

    double eval(double x, double y) const {
        double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        double a = d2 / (radius * radius);
        return height * std::exp(-std::pow(a, exponent));
    }
};

struct CraterCore {
    double cx, cy;
    double radius;      // rim crest radius
    double rim_height;  // above base layer
    double sigma_in;    // inner flank
    double floor_depth; // below base layer

    double eval(double d, double sigma_out) const {
        double sigma = d <= radius ? sigma_in : sigma_out;
        double rim = rim_height *
                     std::exp(-((d - radius) / sigma) * ((d - radius) / sigma));
        double floor = -floor_depth *
                       (1.0 - smoothstep(radius - 2.0 * sigma_in, radius, d));
        return rim + floor;
    }
};

// II and III share the crater core draw so that equal seeds produce matching
// rims and floors; III then widens the margin and the stiff region.
CraterCore draw_crater_core(Rng& rng) {
    CraterCore c;
    c.cx = rng.uniform(12.0, 18.0);
    c.cy = rng.uniform(12.0, 18.0);
    c.radius = rng.uniform(5.0, 8.0);
    c.rim_height = rng.uniform(3.0, 5.0);
    c.sigma_in = rng.uniform(2.0, 3.0) / 2.0;
    c.floor_depth = rng.uniform(0.5, 1.0);
    return c;
}

}  // namespace

PhantomSpec generate_phantom(Borrmann cls, std::uint64_t seed, int grid_size) {
    if (grid_size < 8)
        throw InvalidConfigError("generate_phantom: grid too small");

    PhantomSpec spec;
    spec.borrmann_class = cls;
    spec.seed = seed;
    spec.rows = grid_size;
    spec.cols = grid_size;
    const std::size_t n = static_cast<std::size_t>(grid_size) * grid_size;
    spec.height.assign(n, 0.0);
    spec.stiffness.assign(n, kHealthyStiffness);

    // Mucosal ripple, common to every class.
    Rng ripple_rng(derive_seed(seed, std::string_view("ripple")));
    double ripple_amp = ripple_rng.uniform(0.05, 0.15);
    ValueNoise2D ripple_noise(derive_seed(seed, std::string_view("ripple-field")),
                              6, 2);
    // Normalize the ripple field to [-1, 1] over this grid so the amplitude
    // bound is exact.
    std::vector<double> ripple(n);
    double rlo = 1e300, rhi = -1e300;
    for (int r = 0; r < grid_size; ++r)
        for (int c = 0; c < grid_size; ++c) {
            double v = ripple_noise.sample(double(c) / (grid_size - 1),
                                           double(r) / (grid_size - 1));
            ripple[static_cast<std::size_t>(r) * grid_size + c] = v;
            rlo = std::min(rlo, v);
            rhi = std::max(rhi, v);
        }
    double rmid = 0.5 * (rhi + rlo);
    double rscale = rhi - rlo > 1e-12 ? 2.0 / (rhi - rlo) : 1.0;
    for (auto& v : ripple) v = (v - rmid) * rscale * ripple_amp;

    Rng shape_rng(derive_seed(seed, std::string_view("shape")));
    std::vector<char> tumor_mask(n, 0);

    const double pitch = kPhantomExtentMm / (grid_size - 1);
    auto cell_xy = [&](int r, int c) {
        return std::pair<double, double>{c * pitch, r * pitch};
    };

    switch (cls) {
        case Borrmann::I: {
            // Polypoid dome: peak height is total height above the backplate.
            Bump main;
            main.cx = shape_rng.uniform(12.0, 18.0);
            main.cy = shape_rng.uniform(12.0, 18.0);
            double total_peak = shape_rng.uniform(5.0, 9.0);
            main.height = total_peak - kBaseLayerMm;
            main.radius = shape_rng.uniform(6.0, 10.0);
            main.exponent = shape_rng.uniform(1.5, 3.0);

            int lobes = shape_rng.uniform_int(2, 4);
            std::vector<Bump> bumps{main};
            for (int i = 0; i < lobes; ++i) {
                Bump b;
                double ang = shape_rng.uniform(0.0, 6.283185307179586);
                double rad = shape_rng.uniform(0.3, 0.8) * main.radius;
                b.cx = main.cx + rad * std::cos(ang);
                b.cy = main.cy + rad * std::sin(ang);
                b.height = shape_rng.uniform(0.3, 0.6) * main.height;
                b.radius = shape_rng.uniform(0.25, 0.45) * main.radius;
                b.exponent = main.exponent;
                bumps.push_back(b);
            }

            double mask_level = 0.05 * main.height;
            for (int r = 0; r < grid_size; ++r)
                for (int c = 0; c < grid_size; ++c) {
                    auto [x, y] = cell_xy(r, c);
                    double relief = 0.0;
                    for (const auto& b : bumps)
                        relief = std::max(relief, b.eval(x, y));
                    std::size_t i = static_cast<std::size_t>(r) * grid_size + c;
                    spec.height[i] = kBaseLayerMm + ripple[i] + relief;
                    tumor_mask[i] = relief >= mask_level ? 1 : 0;
                }

            spec.params["center_x_mm"] = main.cx;
            spec.params["center_y_mm"] = main.cy;
            spec.params["peak_height_mm"] = total_peak;
            spec.params["radius_mm"] = main.radius;
            spec.params["exponent"] = main.exponent;
            spec.params["lobe_count"] = lobes;
            break;
        }
        case Borrmann::II:
        case Borrmann::III: {
            CraterCore core = draw_crater_core(shape_rng);
            bool infiltrating = cls == Borrmann::III;

            double sigma_out = sigma_for_decay(1.5);
            double margin_mm = 1.5;
            double ext_base = 0.0, ext_mod = 0.0;
            PeriodicNoise1D boundary(derive_seed(seed, std::string_view("margin")));
            if (infiltrating) {
                double decay = shape_rng.uniform(5.0, 8.0);
                sigma_out = sigma_for_decay(decay);
                ext_base = shape_rng.uniform(5.2, 6.8);
                ext_mod = shape_rng.uniform(0.8, 1.2);
                spec.params["margin_decay_mm"] = decay;
                spec.params["stiff_ext_base_mm"] = ext_base;
                spec.params["stiff_ext_mod_mm"] = ext_mod;
            }

            for (int r = 0; r < grid_size; ++r)
                for (int c = 0; c < grid_size; ++c) {
                    auto [x, y] = cell_xy(r, c);
                    double dx = x - core.cx, dy = y - core.cy;
                    double d = std::sqrt(dx * dx + dy * dy);
                    std::size_t i = static_cast<std::size_t>(r) * grid_size + c;
                    spec.height[i] =
                        kBaseLayerMm + ripple[i] + core.eval(d, sigma_out);
                    double reach = margin_mm;
                    if (infiltrating)
                        reach = ext_base + ext_mod * boundary.sample(
                                                         std::atan2(dy, dx));
                    tumor_mask[i] = d <= core.radius + reach ? 1 : 0;
                }

            spec.params["center_x_mm"] = core.cx;
            spec.params["center_y_mm"] = core.cy;
            spec.params["crater_radius_mm"] = core.radius;
            spec.params["rim_height_mm"] = core.rim_height;
            spec.params["rim_sigma_in_mm"] = core.sigma_in;
            spec.params["floor_depth_mm"] = core.floor_depth;
            break;
        }
        case Borrmann::IV: {
            // Diffuse infiltration: nearly flat relief, wide stiff patch.
            double relief_amp = shape_rng.uniform(0.15, 0.35);
            ValueNoise2D relief_noise(
                derive_seed(seed, std::string_view("relief")), 4, 2);
            ValueNoise2D patch_noise(
                derive_seed(seed, std::string_view("patch")), 3, 1);

            std::vector<double> relief(n), patch(n);
            double lo = 1e300, hi = -1e300;
            for (int r = 0; r < grid_size; ++r)
                for (int c = 0; c < grid_size; ++c) {
                    std::size_t i = static_cast<std::size_t>(r) * grid_size + c;
                    double u = double(c) / (grid_size - 1);
                    double v = double(r) / (grid_size - 1);
                    relief[i] = relief_noise.sample(u, v);
                    patch[i] = patch_noise.sample(u, v);
                    lo = std::min(lo, relief[i]);
                    hi = std::max(hi, relief[i]);
                }
            double mid = 0.5 * (hi + lo);
            double scale = hi - lo > 1e-12 ? 2.0 / (hi - lo) : 1.0;

            // 40th percentile cut leaves >= 60% of cells inside the patch.
            std::vector<double> sorted = patch;
            std::size_t q = static_cast<std::size_t>(0.4 * (n - 1));
            std::nth_element(sorted.begin(), sorted.begin() + q, sorted.end());
            double threshold = sorted[q];

            for (std::size_t i = 0; i < n; ++i) {
                spec.height[i] = kBaseLayerMm + ripple[i] +
                                 (relief[i] - mid) * scale * relief_amp;
                tumor_mask[i] = patch[i] >= threshold ? 1 : 0;
            }

            spec.params["relief_amp_mm"] = relief_amp;
            break;
        }
    }

    spec.params["ripple_amp_mm"] = ripple_amp;

    for (std::size_t i = 0; i < n; ++i) {
        spec.height[i] = std::clamp(spec.height[i], 0.0, kMaxHeightMm);
        spec.stiffness[i] = tumor_mask[i] ? kTumorStiffness : kHealthyStiffness;
    }
    return spec;
}

std::pair<double, double> sample_field(const PhantomSpec& spec, double x,
                                       double y) {
    if (x < 0.0 || x > kPhantomExtentMm || y < 0.0 || y > kPhantomExtentMm)
        throw OutOfBoundsError("sample_field: query outside working area");

    double gx = x / spec.pitch_x();
    double gy = y / spec.pitch_y();
    int c0 = std::min(static_cast<int>(gx), spec.cols - 2);
    int r0 = std::min(static_cast<int>(gy), spec.rows - 2);
    double tx = gx - c0;
    double ty = gy - r0;

    auto lerp2 = [&](const std::vector<double>& f) {
        auto at = [&](int r, int c) {
            return f[static_cast<std::size_t>(r) * spec.cols + c];
        };
        double a = at(r0, c0) * (1 - tx) + at(r0, c0 + 1) * tx;
        double b = at(r0 + 1, c0) * (1 - tx) + at(r0 + 1, c0 + 1) * tx;
        return a * (1 - ty) + b * ty;
    };
    return {lerp2(spec.height), lerp2(spec.stiffness)};
}

std::vector<PhantomSpec> build_phantom_bank(std::uint64_t master_seed,
                                            int grid_size, int per_class) {
    if (per_class < 1)
        throw InvalidConfigError("build_phantom_bank: per_class must be >= 1");
    std::vector<PhantomSpec> bank;
    bank.reserve(static_cast<std::size_t>(per_class) * 4);
    for (Borrmann cls : kAllClasses) {
        for (int i = 0; i < per_class; ++i) {
            std::uint64_t seed = derive_seed(master_seed, to_string(cls),
                                             static_cast<std::uint64_t>(i));
            PhantomSpec spec = generate_phantom(cls, seed, grid_size);
            char idx[8];
            std::snprintf(idx, sizeof idx, "%02d", i);
            spec.phantom_id = to_string(cls) + "-" + idx;
            bank.push_back(std::move(spec));
        }
    }
    return bank;
}

namespace {

void write_f32_blob(const std::string& path, const std::vector<double>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (double v : data) {
        float f = static_cast<float>(v);
        // little-endian byte order regardless of host
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        unsigned char b[4] = {
            static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
            static_cast<unsigned char>(bits >> 16),
            static_cast<unsigned char>(bits >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
}

std::vector<double> read_f32_blob(const std::string& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) throw IoError("truncated blob " + path);
        std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                             (std::uint32_t(b[2]) << 16) |
                             (std::uint32_t(b[3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        out[i] = f;
    }
    return out;
}

}  // namespace

void save_phantom(const PhantomSpec& spec, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["id"] = spec.phantom_id;
    j["borrmann_class"] = to_string(spec.borrmann_class);
    j["seed"] = spec.seed;
    j["grid_rows"] = spec.rows;
    j["grid_cols"] = spec.cols;
    j["extent_mm"] = kPhantomExtentMm;
    j["params"] = spec.params;
    j["height_blob"] = spec.phantom_id + "_height.f32";
    j["stiffness_blob"] = spec.phantom_id + "_stiffness.f32";

    std::ofstream out(dir + "/" + spec.phantom_id + ".json");
    if (!out) throw IoError("cannot write phantom header in " + dir);
    out << j.dump(2) << "\n";

    write_f32_blob(dir + "/" + spec.phantom_id + "_height.f32", spec.height);
    write_f32_blob(dir + "/" + spec.phantom_id + "_stiffness.f32",
                   spec.stiffness);
}

PhantomSpec load_phantom(const std::string& dir, const std::string& phantom_id) {
    std::ifstream in(dir + "/" + phantom_id + ".json");
    if (!in) throw IoError("missing phantom header " + dir + "/" + phantom_id);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(std::string("load_phantom: ") + e.what());
    }

    PhantomSpec spec;
    spec.phantom_id = j.at("id").get<std::string>();
    spec.borrmann_class = borrmann_from_string(j.at("borrmann_class"));
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.rows = j.at("grid_rows").get<int>();
    spec.cols = j.at("grid_cols").get<int>();
    for (auto& [k, v] : j.at("params").items())
        spec.params[k] = v.get<double>();

    std::size_t n = static_cast<std::size_t>(spec.rows) * spec.cols;
    spec.height = read_f32_blob(dir + "/" + j.at("height_blob").get<std::string>(), n);
    spec.stiffness =
        read_f32_blob(dir + "/" + j.at("stiffness_blob").get<std::string>(), n);
    return spec;
}

}  // namespace vts
