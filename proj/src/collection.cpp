#include "vts/collection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace vts {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kStartClearanceMm = 0.5;
}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::Unassigned: return "unassigned";
        case Split::Train: return "train";
        case Split::Test: return "test";
    }
    throw InvalidConfigError("to_string: bad Split value");
}

Split split_from_string(const std::string& s) {
    if (s == "unassigned") return Split::Unassigned;
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw ConfigParseError("split_from_string: '" + s + "'");
}

RigidTransform sample_contact_pose(Rng& rng, const PhantomSpec& spec,
                                   const CollectionConfig& cfg) {
    cfg.check();

    // Target point on the phantom that should land at the window center.
    double px = rng.uniform(0.0, kPhantomExtentMm);
    double py = rng.uniform(0.0, kPhantomExtentMm);
    double spin = rng.uniform(0.0, 2.0 * kPi);
    double tilt_dir = rng.uniform(0.0, 2.0 * kPi);
    double tilt = rng.uniform(0.0, cfg.tilt_max_deg) * kPi / 180.0;

    // Flip the phantom face-down (pi about x), spin about the gel normal,
    // then tilt about an in-plane axis.
    RigidTransform center = RigidTransform::translate(-px, -py, 0.0);
    RigidTransform flip = RigidTransform::rotate(Mat3::rot_x(kPi));
    RigidTransform spin_t = RigidTransform::rotate(Mat3::rot_z(spin));
    RigidTransform tilt_t = RigidTransform::rotate(Mat3::axis_angle(
        {std::cos(tilt_dir), std::sin(tilt_dir), 0.0}, tilt));

    RigidTransform pose =
        compose(tilt_t, compose(spin_t, compose(flip, center)));

    // Lift so the lowest surface point over the window starts just above the
    // gel; the settle solver then only needs a short travel.
    SensorConfig sensor = cfg.sensor();
    ContactMap map = build_contact_map(spec, pose, sensor);
    double min_clear = kMaxTravelMm;
    for (double c : map.clearance) min_clear = std::min(min_clear, c);
    double lift = kStartClearanceMm - min_clear;
    return compose(RigidTransform::translate(0.0, 0.0, lift), pose);
}

std::vector<std::string> DatasetManifest::phantom_ids(Split split) const {
    std::set<std::string> ids;
    for (const auto& e : entries)
        if (e.split == split) ids.insert(e.phantom_id);
    return {ids.begin(), ids.end()};
}

std::size_t DatasetManifest::count(Split split) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.split == split ? 1 : 0;
    return n;
}

std::string DatasetManifest::to_json() const {
    nlohmann::json j;
    j["config"] = {
        {"views_per_phantom", config.views_per_phantom},
        {"force_target", config.force_target},
        {"tilt_max_deg", config.tilt_max_deg},
        {"master_seed", config.master_seed},
        {"resolution", config.resolution},
        {"retry_limit", config.retry_limit},
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
        rows.push_back({
            {"image_path", e.image_path},
            {"phantom_id", e.phantom_id},
            {"borrmann_class", to_string(e.borrmann_class)},
            {"seed", e.seed},
            {"pose", std::vector<double>(e.pose.begin(), e.pose.end())},
            {"achieved_force", e.achieved_force},
            {"contact_fraction", e.contact_fraction},
            {"split", to_string(e.split)},
        });
    }
    j["entries"] = rows;
    return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(std::string("manifest parse: ") + e.what());
    }
    DatasetManifest m;
    const auto& c = j.at("config");
    m.config.views_per_phantom = c.at("views_per_phantom").get<int>();
    m.config.force_target = c.at("force_target").get<double>();
    m.config.tilt_max_deg = c.at("tilt_max_deg").get<double>();
    m.config.master_seed = c.at("master_seed").get<std::uint64_t>();
    m.config.resolution = c.at("resolution").get<int>();
    m.config.retry_limit = c.at("retry_limit").get<int>();
    for (const auto& row : j.at("entries")) {
        ManifestEntry e;
        e.image_path = row.at("image_path").get<std::string>();
        e.phantom_id = row.at("phantom_id").get<std::string>();
        e.borrmann_class = borrmann_from_string(row.at("borrmann_class"));
        e.seed = row.at("seed").get<std::uint64_t>();
        auto pose = row.at("pose").get<std::vector<double>>();
        if (pose.size() != 16)
            throw ConfigParseError("manifest pose must have 16 entries");
        std::copy(pose.begin(), pose.end(), e.pose.begin());
        e.achieved_force = row.at("achieved_force").get<double>();
        e.contact_fraction = row.at("contact_fraction").get<double>();
        e.split = split_from_string(row.at("split").get<std::string>());
        m.entries.push_back(std::move(e));
    }
    return m;
}

void DatasetManifest::save(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("manifest save: cannot open " + path);
    out << to_json() << "\n";
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest load: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json(text);
}

DatasetManifest collect_dataset(const std::vector<PhantomSpec>& bank,
                                const CollectionConfig& cfg,
                                const std::string& dataset_dir, int jobs) {
    cfg.check();
    SensorConfig sensor = cfg.sensor();

    struct PhantomResult {
        std::vector<ManifestEntry> entries;
        std::string error;
    };
    std::vector<PhantomResult> results(bank.size());

    parallel_for(bank.size(), jobs, [&](std::size_t pi) {
        const PhantomSpec& spec = bank[pi];
        PhantomResult& res = results[pi];
        for (int view = 0; view < cfg.views_per_phantom; ++view) {
            std::uint64_t view_seed = derive_seed(cfg.master_seed,
                                                  spec.phantom_id,
                                                  static_cast<std::uint64_t>(view));
            Rng rng(view_seed);
            std::optional<TactileFrame> frame;
            for (int attempt = 0; attempt < cfg.retry_limit && !frame; ++attempt) {
                RigidTransform pose = sample_contact_pose(rng, spec, cfg);
                frame = capture(spec, pose, sensor);
            }
            if (!frame) {
                res.error = "phantom " + spec.phantom_id + " view " +
                            std::to_string(view) + ": no contact after " +
                            std::to_string(cfg.retry_limit) + " retries";
                return;
            }

            char name[16];
            std::snprintf(name, sizeof name, "%03d.ppm", view);
            std::string rel = spec.phantom_id + "/" + name;
            write_ppm(frame->image, dataset_dir + "/" + rel);

            ManifestEntry e;
            e.image_path = rel;
            e.phantom_id = spec.phantom_id;
            e.borrmann_class = spec.borrmann_class;
            e.seed = view_seed;
            e.pose = frame->pose_used.to_array();
            e.achieved_force = frame->achieved_force;
            e.contact_fraction = frame->contact_fraction;
            res.entries.push_back(std::move(e));
        }
    });

    DatasetManifest manifest;
    manifest.config = cfg;
    for (const auto& res : results) {
        if (!res.error.empty()) throw RetryExhaustedError(res.error);
        manifest.entries.insert(manifest.entries.end(), res.entries.begin(),
                                res.entries.end());
    }
    return manifest;
}

DatasetManifest split_train_test(const DatasetManifest& manifest,
                                 std::uint64_t split_seed) {
    std::map<Borrmann, std::set<std::string>> by_class;
    for (const auto& e : manifest.entries)
        by_class[e.borrmann_class].insert(e.phantom_id);

    std::map<std::string, Split> assignment;
    for (const auto& [cls, id_set] : by_class) {
        if (id_set.size() < 2)
            throw InsufficientPhantomsError(
                "split_train_test: class " + to_string(cls) +
                " has fewer than 2 phantoms");
        std::vector<std::string> ids(id_set.begin(), id_set.end());
        Rng rng(derive_seed(split_seed, to_string(cls)));
        rng.shuffle(ids);

        // 8:3 for the default 11 per class; other sizes keep the same ratio,
        // rounding toward train but never emptying the test side.
        std::size_t n = ids.size();
        std::size_t n_test = std::max<std::size_t>(1, n * 3 / 11);
        for (std::size_t i = 0; i < n; ++i)
            assignment[ids[i]] = i < n - n_test ? Split::Train : Split::Test;
    }

    DatasetManifest out = manifest;
    for (auto& e : out.entries) e.split = assignment.at(e.phantom_id);
    return out;
}

}  // namespace vts
