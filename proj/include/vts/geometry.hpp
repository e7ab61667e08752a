#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "vts/common.hpp"

namespace vts {

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra. Translations are millimeters throughout
// the project; rotations are stored as matrices and converted to quaternions
// where a solver needs them.
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
    }
};

struct Mat3 {
    // row-major
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    static Mat3 identity() { return Mat3{}; }
    static Mat3 zero() {
        Mat3 r;
        r.m = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
        return r;
    }

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r = zero();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) {
                double a = m[i][k];
                for (int j = 0; j < 3; ++j) r.m[i][j] += a * o.m[k][j];
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Mat3 operator+(const Mat3& o) const {
        Mat3 r = zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r = zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }
    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    Mat3 inverse() const;

    // Distance from orthonormality, max-abs entry of R^T R - I.
    double orthonormal_defect() const;

    // Nearest rotation via Newton polar iteration R <- (R + R^-T)/2.
    Mat3 orthonormalized() const;

    static Mat3 rot_x(double rad);
    static Mat3 rot_y(double rad);
    static Mat3 rot_z(double rad);
    // Rodrigues rotation about a (normalized internally) axis.
    static Mat3 axis_angle(const Vec3& axis, double rad);
};

// ---------------------------------------------------------------------------
// UnitQuaternion, Hamilton convention, w first. Canonical form has w >= 0.
// ---------------------------------------------------------------------------

struct UnitQuaternion {
    double w = 1, x = 0, y = 0, z = 0;

    UnitQuaternion() = default;
    UnitQuaternion(double w_, double x_, double y_, double z_)
        : w(w_), x(x_), y(y_), z(z_) {}

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    UnitQuaternion normalized() const {
        double n = norm();
        return {w / n, x / n, y / n, z / n};
    }
    // w >= 0; ties broken by first nonzero component positive
    UnitQuaternion canonical() const;

    UnitQuaternion operator*(const UnitQuaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }
    UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }

    Mat3 to_matrix() const;
    static UnitQuaternion from_matrix(const Mat3& r);

    double dot(const UnitQuaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }
    // rotation angle in [0, pi]
    double angle() const;
};

// ---------------------------------------------------------------------------
// RigidTransform: SE(3) element, rotation matrix + translation in mm.
// ---------------------------------------------------------------------------

class RigidTransform {
public:
    RigidTransform() = default;
    RigidTransform(const Mat3& rotation, const Vec3& translation)
        : rotation_(rotation), translation_(translation) {}

    static RigidTransform identity() { return {}; }
    static RigidTransform translate(double x, double y, double z) {
        return {Mat3::identity(), {x, y, z}};
    }
    static RigidTransform rotate(const Mat3& r) { return {r, {0, 0, 0}}; }

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

    // 4x4 row-major homogeneous form, last row (0,0,0,1).
    std::array<double, 16> to_array() const;
    static RigidTransform from_array(const std::array<double, 16>& a);

    bool valid(double tol = 1e-9) const;

    // Geodesic rotation distance (rad) and translation distance (mm) to `o`.
    double rotation_distance(const RigidTransform& o) const;
    double translation_distance(const RigidTransform& o) const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

// Result applies b then a (homogeneous product a*b). A polar correction kicks
// in when float drift pushes the rotation off the manifold.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

// ---------------------------------------------------------------------------
// FrameGraph: named frames (R, B, C, T, H by convention, any string works)
// with rigid edges. Adding edge (a,b) implicitly defines (b,a) as the inverse.
// ---------------------------------------------------------------------------

class FrameGraph {
public:
    void add_edge(const std::string& from, const std::string& to,
                  const RigidTransform& t);

    bool has_frame(const std::string& frame) const;

    // Product of edge transforms along a path found by BFS. Throws NoPathError
    // when the frames are disconnected. Path choice is deterministic; when the
    // graph has redundant consistent edges any path gives the same result.
    RigidTransform resolve(const std::string& from, const std::string& to) const;

    // Max disagreement (rotation rad, translation mm) between resolve() and a
    // single-edge shortcut, over all redundant edges. Zero for tree graphs.
    std::pair<double, double> consistency_defect() const;

    std::vector<std::string> frames() const;

private:
    std::map<std::pair<std::string, std::string>, RigidTransform> edges_;
    std::map<std::string, std::vector<std::string>> adjacency_;
};

}  // namespace vts
