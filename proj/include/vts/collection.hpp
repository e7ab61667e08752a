#pragma once

#include <string>
#include <vector>

#include "vts/phantom.hpp"
#include "vts/tactile.hpp"

namespace vts {

struct CollectionConfig {
    int views_per_phantom = 50;
    double force_target = 3.0;   // N
    double tilt_max_deg = 15.0;
    std::uint64_t master_seed = 0;
    int resolution = 256;
    int retry_limit = 20;

    void check() const {
        if (views_per_phantom < 1)
            throw InvalidConfigError("CollectionConfig: views_per_phantom >= 1");
        if (force_target > kForceThresholdN || force_target <= 0)
            throw InvalidConfigError("CollectionConfig: bad force_target");
        if (tilt_max_deg < 0 || tilt_max_deg > 30)
            throw InvalidConfigError("CollectionConfig: tilt must be in [0,30] deg");
    }

    SensorConfig sensor() const {
        SensorConfig s;
        s.resolution = resolution;
        s.force_target = force_target;
        return s;
    }
};

enum class Split { Unassigned, Train, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestEntry {
    std::string image_path;  // relative to the manifest file
    std::string phantom_id;
    Borrmann borrmann_class = Borrmann::I;
    std::uint64_t seed = 0;  // per-view seed
    std::array<double, 16> pose{};
    double achieved_force = 0.0;
    double contact_fraction = 0.0;
    Split split = Split::Unassigned;
};

struct DatasetManifest {
    CollectionConfig config;
    std::vector<ManifestEntry> entries;

    std::vector<std::string> phantom_ids(Split split) const;
    std::size_t count(Split split) const;

    std::string to_json() const;
    static DatasetManifest from_json(const std::string& text);

    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

// Random contact pose (phantom -> sensor): the window center lands somewhere
// on the phantom, with uniform in-plane spin and a bounded tilt. The phantom
// is lifted so its lowest point starts 0.5 mm above the gel.
RigidTransform sample_contact_pose(Rng& rng, const PhantomSpec& spec,
                                   const CollectionConfig& cfg);

// Force-limited collection over a phantom bank; writes PPM images under
// dataset_dir/{phantom_id}/{view:03}.ppm and returns the manifest (paths are
// relative to dataset_dir). Deterministic per master_seed.
DatasetManifest collect_dataset(const std::vector<PhantomSpec>& bank,
                                const CollectionConfig& cfg,
                                const std::string& dataset_dir, int jobs = 0);

// Tumor-level split: per class, phantoms are shuffled by split_seed and dealt
// 8:3 (for the default 11); every image follows its phantom.
DatasetManifest split_train_test(const DatasetManifest& manifest,
                                 std::uint64_t split_seed);

}  // namespace vts
