#include "vts/handeye.hpp"

#include <nlohmann/json.hpp>

#include "vts/jacobi.hpp"

namespace vts {

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Left and right quaternion multiplication matrices, (w,x,y,z) ordering:
// q*p = L(q) p and p*q = R(q) p.
Mat4 left_mult(const UnitQuaternion& q) {
    return {{{q.w, -q.x, -q.y, -q.z},
             {q.x, q.w, -q.z, q.y},
             {q.y, q.z, q.w, -q.x},
             {q.z, -q.y, q.x, q.w}}};
}

Mat4 right_mult(const UnitQuaternion& q) {
    return {{{q.w, -q.x, -q.y, -q.z},
             {q.x, q.w, q.z, -q.y},
             {q.y, -q.z, q.w, q.x},
             {q.z, q.y, -q.x, q.w}}};
}

Vec3 rotation_axis(const RigidTransform& t) {
    UnitQuaternion q = UnitQuaternion::from_matrix(t.rotation()).canonical();
    Vec3 axis{q.x, q.y, q.z};
    double n = axis.norm();
    return n > 1e-12 ? axis * (1.0 / n) : Vec3{0, 0, 0};
}

}  // namespace

double MotionPair::rotation_angle_A() const {
    return UnitQuaternion::from_matrix(A.rotation()).angle();
}

double MotionPair::rotation_angle_B() const {
    return UnitQuaternion::from_matrix(B.rotation()).angle();
}

RigidTransform solve_axxb_separable(const std::vector<MotionPair>& pairs) {
    if (pairs.size() < 2)
        throw TooFewPairsError("solve_axxb_separable: need >= 2 motion pairs");

    // Axis-diversity precondition: at least one pair of rotation axes more
    // than 1e-2 rad apart, otherwise the translation system is rank < 3.
    std::vector<Vec3> axes;
    for (const auto& p : pairs)
        if (!p.weakly_informative()) axes.push_back(rotation_axis(p.A));
    bool diverse = false;
    for (std::size_t i = 0; i < axes.size() && !diverse; ++i)
        for (std::size_t j = i + 1; j < axes.size() && !diverse; ++j) {
            double c = std::clamp(std::abs(axes[i].dot(axes[j])), 0.0, 1.0);
            if (std::acos(c) > 1e-2) diverse = true;
        }
    if (!diverse)
        throw DegenerateMotionError(
            "solve_axxb_separable: rotation axes are all parallel");

    // Stage 1: rotation. Minimize sum ||q_A*q_X - q_X*q_B||^2 = q^T M q over
    // unit quaternions; the minimizer is the smallest eigenvector of M.
    std::array<std::array<double, 4>, 4> M{};
    for (const auto& p : pairs) {
        UnitQuaternion qa = UnitQuaternion::from_matrix(p.A.rotation()).canonical();
        UnitQuaternion qb = UnitQuaternion::from_matrix(p.B.rotation()).canonical();
        Mat4 L = left_mult(qa);
        Mat4 R = right_mult(qb);
        Mat4 D{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) D[i][j] = L[i][j] - R[i][j];
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += D[k][a] * D[k][b];
                M[a][b] += acc;
            }
    }
    auto eig = SymmetricEigen<4>::solve(M);
    UnitQuaternion qx{eig.vectors[0][0], eig.vectors[0][1], eig.vectors[0][2],
                      eig.vectors[0][3]};
    Mat3 Rx = qx.canonical().to_matrix();

    // Stage 2: translation. Stack (R_A - I) t = R_X t_B - t_A and solve the
    // 3x3 normal equations.
    Mat3 N = Mat3::zero();
    Vec3 rhs{0, 0, 0};
    for (const auto& p : pairs) {
        Mat3 C = p.A.rotation();
        for (int i = 0; i < 3; ++i) C(i, i) -= 1.0;
        Vec3 d = Rx * p.B.translation() - p.A.translation();
        N = N + C.transposed() * C;
        rhs = rhs + C.transposed() * d;
    }
    auto neig = SymmetricEigen<3>::solve(N.m);
    if (neig.values[0] < 1e-9 * std::max(neig.values[2], 1e-30))
        throw DegenerateMotionError(
            "solve_axxb_separable: translation system rank < 3");
    Vec3 tx = N.inverse() * rhs;

    return {Rx, tx};
}

std::vector<MotionPair> build_motion_pairs(
    const std::vector<RigidTransform>& robot_poses,
    const std::vector<RigidTransform>& camera_views) {
    if (robot_poses.size() != camera_views.size())
        throw MisalignedInputError("build_motion_pairs: list length mismatch");

    std::vector<MotionPair> pairs;
    auto add = [&](std::size_t i, std::size_t j) {
        MotionPair p;
        p.A = compose(invert(robot_poses[j]), robot_poses[i]);
        p.B = compose(invert(camera_views[j]), camera_views[i]);
        pairs.push_back(p);
    };
    for (std::size_t i = 0; i + 1 < robot_poses.size(); ++i) add(i, i + 1);
    for (std::size_t i = 0; i + 2 < robot_poses.size(); ++i) add(i, i + 2);
    return pairs;
}

WorkcellRegistration register_workcell(
    const std::vector<RigidTransform>& robot_poses,
    const std::vector<RigidTransform>& camera_views,
    const RigidTransform& T_CH) {
    if (robot_poses.size() != camera_views.size())
        throw MisalignedInputError("register_workcell: list length mismatch");
    if (robot_poses.size() < 3)
        throw TooFewPairsError("register_workcell: need >= 3 pose/view entries");

    std::vector<MotionPair> pairs = build_motion_pairs(robot_poses, camera_views);
    RigidTransform t_bt = solve_axxb_separable(pairs);

    // Per-pose camera estimates T_RC_i = T_RB_i * T_BT * T_CT_i^-1, averaged
    // with quaternion sign alignment against the first estimate.
    std::vector<RigidTransform> estimates;
    estimates.reserve(robot_poses.size());
    for (std::size_t i = 0; i < robot_poses.size(); ++i)
        estimates.push_back(
            compose(compose(robot_poses[i], t_bt), invert(camera_views[i])));

    UnitQuaternion q0 = UnitQuaternion::from_matrix(estimates[0].rotation());
    double qw = 0, qxs = 0, qy = 0, qz = 0;
    Vec3 tmean{0, 0, 0};
    for (const auto& e : estimates) {
        UnitQuaternion q = UnitQuaternion::from_matrix(e.rotation());
        if (q.dot(q0) < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
        qw += q.w;
        qxs += q.x;
        qy += q.y;
        qz += q.z;
        tmean = tmean + e.translation();
    }
    double inv_n = 1.0 / static_cast<double>(estimates.size());
    UnitQuaternion qmean =
        UnitQuaternion{qw * inv_n, qxs * inv_n, qy * inv_n, qz * inv_n}
            .normalized();
    RigidTransform t_rc{qmean.to_matrix(), tmean * inv_n};

    WorkcellRegistration reg;
    reg.T_RC = t_rc;
    reg.T_BT = t_bt;
    reg.T_CH = T_CH;
    reg.pair_count = pairs.size();
    for (const auto& p : pairs)
        reg.pair_rotation_angles.push_back(p.rotation_angle_A());
    for (const auto& e : estimates) {
        reg.residual_rot = std::max(reg.residual_rot, t_rc.rotation_distance(e));
        reg.residual_trans =
            std::max(reg.residual_trans, t_rc.translation_distance(e));
    }
    return reg;
}

std::string WorkcellRegistration::to_json() const {
    nlohmann::json j;
    auto arr = [](const RigidTransform& t) {
        auto a = t.to_array();
        return std::vector<double>(a.begin(), a.end());
    };
    j["t_rc"] = arr(T_RC);
    j["t_bt"] = arr(T_BT);
    j["t_ch"] = arr(T_CH);
    j["residual_rot_rad"] = residual_rot;
    j["residual_trans_mm"] = residual_trans;
    j["pair_count"] = pair_count;
    j["pair_rotation_angles_rad"] = pair_rotation_angles;
    return j.dump(2);
}

}  // namespace vts
