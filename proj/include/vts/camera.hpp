#pragma once

#include <array>
#include <string>
#include <vector>

#include "vts/geometry.hpp"

namespace vts {

// ---------------------------------------------------------------------------
// Pinhole camera with the 10-parameter Brown distortion vector:
// k1..k6 rational radial, p1/p2 tangential, s1/s2 thin prism.
// ---------------------------------------------------------------------------

struct CameraModel {
    double fx = 600.0;
    double fy = 600.0;
    double cx = 320.0;
    double cy = 240.0;
    double skew = 0.0;
    std::array<double, 10> distortion{};  // k1,k2,k3,k4,k5,k6,p1,p2,s1,s2

    CameraModel() = default;
    CameraModel(double fx_, double fy_, double cx_, double cy_)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
        check();
    }

    void check() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw InvalidConfigError("CameraModel: focal lengths must be > 0");
    }

    bool has_distortion() const {
        for (double d : distortion)
            if (d != 0.0) return true;
        return false;
    }
};

struct Pixel {
    double u = 0, v = 0;
};

// One plane point (z = 0 in target frame, mm) with its observed pixel.
struct Correspondence {
    double X = 0, Y = 0;
    Pixel px;
};

using CorrespondenceSet = std::vector<Correspondence>;

// Checkerboard-style planar target: rows x cols inner corners, pitch mm.
struct PlanarTarget {
    int rows = 6;
    int cols = 9;
    double pitch = 25.0;

    PlanarTarget() = default;
    PlanarTarget(int rows_, int cols_, double pitch_)
        : rows(rows_), cols(cols_), pitch(pitch_) {
        if (rows < 2 || cols < 2 || pitch <= 0)
            throw InvalidConfigError("PlanarTarget: bad dimensions");
    }

    // Corner coordinates in frame T, z = 0, row-major.
    std::vector<Vec3> points() const {
        std::vector<Vec3> out;
        out.reserve(static_cast<std::size_t>(rows) * cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                out.push_back({c * pitch, r * pitch, 0.0});
        return out;
    }
};

// Distortion applied to normalized coordinates (x, y).
void distort_normalized(const std::array<double, 10>& d, double x, double y,
                        double& xd, double& yd);

// Fixed-point inverse of distort_normalized (used when estimating poses with
// a known nonzero distortion vector).
void undistort_normalized(const std::array<double, 10>& d, double xd, double yd,
                          double& x, double& y);

// Project a target-frame point through pose_CT and the camera. Throws
// BehindCameraError when the camera-frame depth is <= 1e-6 mm.
Pixel project(const CameraModel& cam, const RigidTransform& pose_CT,
              const Vec3& point_T);

// Normalized-DLT homography from >= 4 plane/pixel correspondences, scaled so
// H[2][2] = 1. Throws DegenerateError on rank-deficient (collinear) input.
std::array<std::array<double, 3>, 3> estimate_homography(
    const CorrespondenceSet& correspondences);

// Zhang closed-form intrinsics from >= 3 views of the planar target, zero skew
// enforced. Distortion is not estimated and comes back all-zero.
CameraModel calibrate_zhang(const std::vector<CorrespondenceSet>& views);

// Planar pose from homography decomposition with positive-depth selection.
RigidTransform estimate_target_pose(const CameraModel& cam,
                                    const CorrespondenceSet& view);

// Synthesize the correspondences a corner detector would output: project the
// board corners through the ground-truth camera at pose_CT, optionally adding
// iid Gaussian pixel noise.
CorrespondenceSet synthesize_view(const CameraModel& cam,
                                  const RigidTransform& pose_CT,
                                  const PlanarTarget& target,
                                  double pixel_noise_sigma = 0.0,
                                  Rng* rng = nullptr);

// Replayable calibration fixtures: JSON rows [[X, Y, 0], [u, v]].
std::string correspondences_to_json(const CorrespondenceSet& set);
CorrespondenceSet correspondences_from_json(const std::string& text);

double reprojection_rms(const CameraModel& cam, const RigidTransform& pose_CT,
                        const CorrespondenceSet& set);

}  // namespace vts
