#include "vts/camera.hpp"

#include <nlohmann/json.hpp>

#include "vts/jacobi.hpp"

namespace vts {

using Mat33 = std::array<std::array<double, 3>, 3>;

void distort_normalized(const std::array<double, 10>& d, double x, double y,
                        double& xd, double& yd) {
    const double k1 = d[0], k2 = d[1], k3 = d[2];
    const double k4 = d[3], k5 = d[4], k6 = d[5];
    const double p1 = d[6], p2 = d[7];
    const double s1 = d[8], s2 = d[9];

    double r2 = x * x + y * y;
    double r4 = r2 * r2;
    double r6 = r4 * r2;
    double radial = (1.0 + k1 * r2 + k2 * r4 + k3 * r6) /
                    (1.0 + k4 * r2 + k5 * r4 + k6 * r6);
    xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x) + s1 * r2;
    yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y + s2 * r2;
}

void undistort_normalized(const std::array<double, 10>& d, double xd, double yd,
                          double& x, double& y) {
    // Fixed-point iteration x <- xd - (distort(x) - x); converges fast for
    // the mild distortions modeled here.
    x = xd;
    y = yd;
    for (int it = 0; it < 50; ++it) {
        double fx, fy;
        distort_normalized(d, x, y, fx, fy);
        double nx = x + (xd - fx);
        double ny = y + (yd - fy);
        double step = std::abs(nx - x) + std::abs(ny - y);
        x = nx;
        y = ny;
        if (step < 1e-15) break;
    }
}

Pixel project(const CameraModel& cam, const RigidTransform& pose_CT,
              const Vec3& point_T) {
    cam.check();
    Vec3 pc = pose_CT.apply(point_T);
    if (pc.z <= 1e-6)
        throw BehindCameraError("project: point at or behind camera plane");
    double x = pc.x / pc.z;
    double y = pc.y / pc.z;
    double xd, yd;
    distort_normalized(cam.distortion, x, y, xd, yd);
    return {cam.fx * xd + cam.skew * yd + cam.cx, cam.fy * yd + cam.cy};
}

namespace {

struct Normalization {
    double scale = 1.0;
    double tx = 0.0, ty = 0.0;
};

// Hartley normalization: centroid to origin, mean distance sqrt(2).
Normalization normalize_points(const std::vector<std::pair<double, double>>& pts) {
    Normalization n;
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double mean_dist = 0;
    for (const auto& [x, y] : pts)
        mean_dist += std::sqrt((x - mx) * (x - mx) + (y - my) * (y - my));
    mean_dist /= pts.size();
    n.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
    n.tx = -mx * n.scale;
    n.ty = -my * n.scale;
    return n;
}

Mat3 to_mat3(const Mat33& a) {
    Mat3 r;
    r.m = a;
    return r;
}

}  // namespace

std::array<std::array<double, 3>, 3> estimate_homography(
    const CorrespondenceSet& correspondences) {
    const std::size_t n = correspondences.size();
    if (n < 4)
        throw DegenerateError("estimate_homography: need >= 4 correspondences");

    std::vector<std::pair<double, double>> plane, image;
    plane.reserve(n);
    image.reserve(n);
    for (const auto& c : correspondences) {
        plane.push_back({c.X, c.Y});
        image.push_back({c.px.u, c.px.v});
    }
    Normalization np = normalize_points(plane);
    Normalization ni = normalize_points(image);

    // Accumulate A^T A for the 2n x 9 DLT design matrix directly; the
    // homography is the null-space eigenvector.
    std::array<std::array<double, 9>, 9> ata{};
    for (std::size_t i = 0; i < n; ++i) {
        double X = plane[i].first * np.scale + np.tx;
        double Y = plane[i].second * np.scale + np.ty;
        double u = image[i].first * ni.scale + ni.tx;
        double v = image[i].second * ni.scale + ni.ty;
        double rows[2][9] = {
            {-X, -Y, -1, 0, 0, 0, u * X, u * Y, u},
            {0, 0, 0, -X, -Y, -1, v * X, v * Y, v},
        };
        for (const auto& row : rows)
            for (int a = 0; a < 9; ++a)
                for (int b = 0; b < 9; ++b) ata[a][b] += row[a] * row[b];
    }

    auto eig = SymmetricEigen<9>::solve(ata);
    // Rank test: a proper homography leaves exactly one near-zero eigenvalue.
    double scale_ref = std::max(std::abs(eig.values[8]), 1e-30);
    if (eig.values[1] < 1e-16 * scale_ref)
        throw DegenerateError("estimate_homography: rank-deficient input");

    Mat33 hn{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) hn[i][j] = eig.vectors[0][i * 3 + j];

    // Denormalize: H = Ti^-1 * Hn * Tp
    Mat3 Tp, Ti;
    Tp.m = {{{np.scale, 0, np.tx}, {0, np.scale, np.ty}, {0, 0, 1}}};
    Ti.m = {{{ni.scale, 0, ni.tx}, {0, ni.scale, ni.ty}, {0, 0, 1}}};
    Mat3 H = Ti.inverse() * to_mat3(hn) * Tp;

    double h22 = H(2, 2);
    if (std::abs(h22) < 1e-15)
        throw DegenerateError("estimate_homography: H[2][2] vanishes");
    Mat33 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = H(i, j) / h22;
    return out;
}

CameraModel calibrate_zhang(const std::vector<CorrespondenceSet>& views) {
    if (views.size() < 3)
        throw InsufficientViewsError("calibrate_zhang: need >= 3 views");

    // With zero skew, B = K^-T K^-1 has 5 unknowns b = (B11,B22,B13,B23,B33).
    // Each homography contributes h1^T B h2 = 0 and h1^T B h1 = h2^T B h2.
    auto vrow = [](const Mat33& h, int i, int j) {
        return std::array<double, 5>{
            h[0][i] * h[0][j],
            h[1][i] * h[1][j],
            h[0][i] * h[2][j] + h[2][i] * h[0][j],
            h[1][i] * h[2][j] + h[2][i] * h[1][j],
            h[2][i] * h[2][j],
        };
    };

    std::array<std::array<double, 5>, 5> ata{};
    for (const auto& view : views) {
        Mat33 h = estimate_homography(view);
        auto v01 = vrow(h, 0, 1);
        auto v00 = vrow(h, 0, 0);
        auto v11 = vrow(h, 1, 1);
        std::array<double, 5> diff{};
        for (int i = 0; i < 5; ++i) diff[i] = v00[i] - v11[i];
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
                ata[a][b] += v01[a] * v01[b];
                ata[a][b] += diff[a] * diff[b];
            }
    }

    auto eig = SymmetricEigen<5>::solve(ata);
    double scale_ref = std::max(std::abs(eig.values[4]), 1e-30);
    if (eig.values[1] < 1e-12 * scale_ref)
        throw DegenerateError("calibrate_zhang: views are degenerate");

    const auto& b = eig.vectors[0];
    double B11 = b[0], B22 = b[1], B13 = b[2], B23 = b[3], B33 = b[4];
    // B is defined up to sign; pick the sign that makes B11 positive.
    if (B11 < 0) {
        B11 = -B11;
        B22 = -B22;
        B13 = -B13;
        B23 = -B23;
        B33 = -B33;
    }
    if (B11 <= 0 || B22 <= 0)
        throw DegenerateError("calibrate_zhang: non-positive-definite solution");

    double cx = -B13 / B11;
    double cy = -B23 / B22;
    double lambda = B33 - (B13 * B13 / B11 + B23 * B23 / B22);
    if (lambda <= 0)
        throw DegenerateError("calibrate_zhang: negative scale, degenerate views");

    CameraModel cam;
    cam.fx = std::sqrt(lambda / B11);
    cam.fy = std::sqrt(lambda / B22);
    cam.cx = cx;
    cam.cy = cy;
    cam.skew = 0.0;
    cam.distortion = {};
    cam.check();
    return cam;
}

RigidTransform estimate_target_pose(const CameraModel& cam,
                                    const CorrespondenceSet& view) {
    cam.check();
    if (view.size() < 4)
        throw DegenerateError("estimate_target_pose: need >= 4 correspondences");

    CorrespondenceSet working = view;
    if (cam.has_distortion()) {
        // Map observed pixels back to ideal pinhole pixels before the DLT.
        for (auto& c : working) {
            double yd = (c.px.v - cam.cy) / cam.fy;
            double xd = (c.px.u - cam.cx - cam.skew * yd) / cam.fx;
            double x, y;
            undistort_normalized(cam.distortion, xd, yd, x, y);
            c.px = {cam.fx * x + cam.skew * y + cam.cx, cam.fy * y + cam.cy};
        }
    }

    Mat33 h = estimate_homography(working);

    Mat3 K;
    K.m = {{{cam.fx, cam.skew, cam.cx}, {0, cam.fy, cam.cy}, {0, 0, 1}}};
    Mat3 M = K.inverse() * to_mat3(h);

    Vec3 m1{M(0, 0), M(1, 0), M(2, 0)};
    Vec3 m2{M(0, 1), M(1, 1), M(2, 1)};
    Vec3 m3{M(0, 2), M(1, 2), M(2, 2)};

    double n1 = m1.norm(), n2 = m2.norm();
    if (n1 < 1e-12 || n2 < 1e-12)
        throw DegenerateError("estimate_target_pose: collapsed homography");
    double lambda = 2.0 / (n1 + n2);

    Vec3 r1 = m1 * lambda;
    Vec3 r2 = m2 * lambda;
    Vec3 t = m3 * lambda;
    // H and -H encode the same homography; the target must sit in front.
    if (t.z < 0) {
        r1 = -r1;
        r2 = -r2;
        t = -t;
    }
    if (t.z <= 1e-9)
        throw BehindCameraError("estimate_target_pose: target has no positive depth");

    Vec3 r3 = r1.cross(r2);
    Mat3 R;
    R.m = {{{r1.x, r2.x, r3.x}, {r1.y, r2.y, r3.y}, {r1.z, r2.z, r3.z}}};
    R = R.orthonormalized();

    return {R, t};
}

CorrespondenceSet synthesize_view(const CameraModel& cam,
                                  const RigidTransform& pose_CT,
                                  const PlanarTarget& target,
                                  double pixel_noise_sigma, Rng* rng) {
    CorrespondenceSet out;
    for (const Vec3& p : target.points()) {
        Pixel px = project(cam, pose_CT, p);
        if (pixel_noise_sigma > 0.0 && rng != nullptr) {
            px.u += rng->normal(0.0, pixel_noise_sigma);
            px.v += rng->normal(0.0, pixel_noise_sigma);
        }
        out.push_back({p.x, p.y, px});
    }
    return out;
}

std::string correspondences_to_json(const CorrespondenceSet& set) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : set)
        arr.push_back({{c.X, c.Y, 0.0}, {c.px.u, c.px.v}});
    return arr.dump();
}

CorrespondenceSet correspondences_from_json(const std::string& text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(std::string("correspondences_from_json: ") + e.what());
    }
    CorrespondenceSet out;
    for (const auto& row : arr) {
        Correspondence c;
        c.X = row.at(0).at(0).get<double>();
        c.Y = row.at(0).at(1).get<double>();
        c.px.u = row.at(1).at(0).get<double>();
        c.px.v = row.at(1).at(1).get<double>();
        out.push_back(c);
    }
    return out;
}

double reprojection_rms(const CameraModel& cam, const RigidTransform& pose_CT,
                        const CorrespondenceSet& set) {
    if (set.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : set) {
        Pixel p = project(cam, pose_CT, {c.X, c.Y, 0.0});
        double du = p.u - c.px.u;
        double dv = p.v - c.px.v;
        sum += du * du + dv * dv;
    }
    return std::sqrt(sum / static_cast<double>(set.size()));
}

}  // namespace vts
