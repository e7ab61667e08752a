#pragma once

#include <string>
#include <vector>

#include "vts/geometry.hpp"

namespace vts {

// One relative-motion observation for the AX=XB problem:
//   A = T_RB_j^-1 * T_RB_i   (flange motion from the robot controller)
//   B = T_CT_j^-1 * T_CT_i   (target motion seen by the camera)
struct MotionPair {
    RigidTransform A;
    RigidTransform B;

    double rotation_angle_A() const;
    double rotation_angle_B() const;
    // Similar rotations must share their angle; a pair rotating by less than
    // 1e-3 rad constrains the solution only weakly.
    bool weakly_informative() const { return rotation_angle_A() < 1e-3; }
};

struct WorkcellRegistration {
    RigidTransform T_RC;   // robot base -> camera (estimated)
    RigidTransform T_BT;   // flange -> target/phantom mount (estimated)
    RigidTransform T_CH;   // camera -> sensor base (ground truth, carried)
    double residual_rot = 0.0;    // rad, max per-pose deviation from mean
    double residual_trans = 0.0;  // mm
    std::size_t pair_count = 0;
    std::vector<double> pair_rotation_angles;  // rad, per motion pair

    std::string to_json() const;
};

// Separable AX=XB: rotation from the smallest-eigenvalue eigenvector of the
// accumulated 4x4 quaternion system, then translation by linear least squares
// on (R_A - I) t_X = R_X t_B - t_A. Throws TooFewPairsError (< 2 pairs) or
// DegenerateMotionError (all rotation axes parallel).
RigidTransform solve_axxb_separable(const std::vector<MotionPair>& pairs);

// Builds consecutive plus stride-2 motion pairs from index-aligned pose lists,
// solves X = T_BT, and averages the per-pose T_RC estimates. T_CH is injected
// scene ground truth and only carried into the report.
WorkcellRegistration register_workcell(
    const std::vector<RigidTransform>& robot_poses,
    const std::vector<RigidTransform>& camera_views,
    const RigidTransform& T_CH = RigidTransform::identity());

std::vector<MotionPair> build_motion_pairs(
    const std::vector<RigidTransform>& robot_poses,
    const std::vector<RigidTransform>& camera_views);

}  // namespace vts
