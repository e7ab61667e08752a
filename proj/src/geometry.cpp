#include "vts/geometry.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace vts {

Mat3 Mat3::inverse() const {
    double d = det();
    if (std::abs(d) < 1e-300)
        throw DegenerateError("Mat3::inverse: singular matrix");
    Mat3 r;
    r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
    r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
    r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
    r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
    r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
    r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
    r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
    r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
    r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
    return r;
}

double Mat3::orthonormal_defect() const {
    Mat3 g = transposed() * (*this);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double target = i == j ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(g.m[i][j] - target));
        }
    return worst;
}

Mat3 Mat3::orthonormalized() const {
    Mat3 r = *this;
    for (int it = 0; it < 20; ++it) {
        Mat3 next = (r + r.inverse().transposed()) * 0.5;
        double delta = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                delta = std::max(delta, std::abs(next.m[i][j] - r.m[i][j]));
        r = next;
        if (delta < 1e-15) break;
    }
    return r;
}

Mat3 Mat3::rot_x(double rad) {
    double c = std::cos(rad), s = std::sin(rad);
    Mat3 r;
    r.m = {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
    return r;
}

Mat3 Mat3::rot_y(double rad) {
    double c = std::cos(rad), s = std::sin(rad);
    Mat3 r;
    r.m = {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
    return r;
}

Mat3 Mat3::rot_z(double rad) {
    double c = std::cos(rad), s = std::sin(rad);
    Mat3 r;
    r.m = {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
    return r;
}

Mat3 Mat3::axis_angle(const Vec3& axis, double rad) {
    Vec3 a = axis.normalized();
    double c = std::cos(rad), s = std::sin(rad), t = 1.0 - c;
    Mat3 r;
    r.m = {{{t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y},
            {t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x},
            {t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c}}};
    return r;
}

UnitQuaternion UnitQuaternion::canonical() const {
    UnitQuaternion q = normalized();
    double lead = q.w;
    if (lead == 0.0) lead = q.x != 0.0 ? q.x : (q.y != 0.0 ? q.y : q.z);
    if (lead < 0.0) return {-q.w, -q.x, -q.y, -q.z};
    return q;
}

Mat3 UnitQuaternion::to_matrix() const {
    UnitQuaternion q = normalized();
    double ww = q.w * q.w, xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
    double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
    double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
    Mat3 r;
    r.m = {{{ww + xx - yy - zz, 2 * (xy - wz), 2 * (xz + wy)},
            {2 * (xy + wz), ww - xx + yy - zz, 2 * (yz - wx)},
            {2 * (xz - wy), 2 * (yz + wx), ww - xx - yy + zz}}};
    return r;
}

UnitQuaternion UnitQuaternion::from_matrix(const Mat3& r) {
    // Shepperd's method: branch on the largest of the four squared components.
    double tr = r(0, 0) + r(1, 1) + r(2, 2);
    UnitQuaternion q;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q.w = 0.25 * s;
        q.x = (r(2, 1) - r(1, 2)) / s;
        q.y = (r(0, 2) - r(2, 0)) / s;
        q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
        q.w = (r(2, 1) - r(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (r(0, 1) + r(1, 0)) / s;
        q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
        q.w = (r(0, 2) - r(2, 0)) / s;
        q.x = (r(0, 1) + r(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
        q.w = (r(1, 0) - r(0, 1)) / s;
        q.x = (r(0, 2) + r(2, 0)) / s;
        q.y = (r(1, 2) + r(2, 1)) / s;
        q.z = 0.25 * s;
    }
    return q.canonical();
}

double UnitQuaternion::angle() const {
    UnitQuaternion q = canonical();
    double c = std::clamp(q.w, -1.0, 1.0);
    return 2.0 * std::acos(c);
}

std::array<double, 16> RigidTransform::to_array() const {
    return {rotation_(0, 0), rotation_(0, 1), rotation_(0, 2), translation_.x,
            rotation_(1, 0), rotation_(1, 1), rotation_(1, 2), translation_.y,
            rotation_(2, 0), rotation_(2, 1), rotation_(2, 2), translation_.z,
            0.0,             0.0,             0.0,             1.0};
}

RigidTransform RigidTransform::from_array(const std::array<double, 16>& a) {
    Mat3 r;
    r.m = {{{a[0], a[1], a[2]}, {a[4], a[5], a[6]}, {a[8], a[9], a[10]}}};
    return {r, {a[3], a[7], a[11]}};
}

bool RigidTransform::valid(double tol) const {
    if (rotation_.orthonormal_defect() > tol) return false;
    if (std::abs(rotation_.det() - 1.0) > tol) return false;
    for (double v : {translation_.x, translation_.y, translation_.z})
        if (!std::isfinite(v)) return false;
    return true;
}

double RigidTransform::rotation_distance(const RigidTransform& o) const {
    Mat3 rel = rotation_.transposed() * o.rotation();
    return UnitQuaternion::from_matrix(rel).angle();
}

double RigidTransform::translation_distance(const RigidTransform& o) const {
    return (translation_ - o.translation()).norm();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    Mat3 r = a.rotation() * b.rotation();
    if (r.orthonormal_defect() > 1e-12) r = r.orthonormalized();
    return {r, a.rotation() * b.translation() + a.translation()};
}

RigidTransform invert(const RigidTransform& t) {
    Mat3 rt = t.rotation().transposed();
    return {rt, -(rt * t.translation())};
}

void FrameGraph::add_edge(const std::string& from, const std::string& to,
                          const RigidTransform& t) {
    if (from == to)
        throw InvalidConfigError("FrameGraph: self-edge on frame " + from);
    bool fresh = edges_.find({from, to}) == edges_.end();
    edges_[{from, to}] = t;
    edges_[{to, from}] = invert(t);
    if (fresh) {
        adjacency_[from].push_back(to);
        adjacency_[to].push_back(from);
    }
}

bool FrameGraph::has_frame(const std::string& frame) const {
    return adjacency_.find(frame) != adjacency_.end();
}

RigidTransform FrameGraph::resolve(const std::string& from,
                                   const std::string& to) const {
    if (from == to) {
        if (!has_frame(from) && !edges_.empty())
            throw NoPathError("resolve: unknown frame " + from);
        return RigidTransform::identity();
    }
    if (!has_frame(from) || !has_frame(to))
        throw NoPathError("resolve: no path " + from + " -> " + to);

    std::map<std::string, std::string> parent;
    std::deque<std::string> queue{from};
    std::set<std::string> seen{from};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        if (cur == to) break;
        auto it = adjacency_.find(cur);
        if (it == adjacency_.end()) continue;
        for (const auto& next : it->second) {
            if (seen.insert(next).second) {
                parent[next] = cur;
                queue.push_back(next);
            }
        }
    }
    if (seen.find(to) == seen.end() || (parent.find(to) == parent.end()))
        throw NoPathError("resolve: no path " + from + " -> " + to);

    std::vector<std::string> path{to};
    while (path.back() != from) path.push_back(parent.at(path.back()));
    std::reverse(path.begin(), path.end());

    RigidTransform acc = RigidTransform::identity();
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        acc = compose(acc, edges_.at({path[i], path[i + 1]}));
    return acc;
}

std::pair<double, double> FrameGraph::consistency_defect() const {
    double worst_rot = 0.0, worst_trans = 0.0;
    for (const auto& [key, t] : edges_) {
        // Re-resolve each edge through the graph; redundant cycles show up as
        // disagreement between the stored edge and the BFS path.
        RigidTransform resolved = resolve(key.first, key.second);
        worst_rot = std::max(worst_rot, resolved.rotation_distance(t));
        worst_trans = std::max(worst_trans, resolved.translation_distance(t));
    }
    return {worst_rot, worst_trans};
}

std::vector<std::string> FrameGraph::frames() const {
    std::vector<std::string> out;
    out.reserve(adjacency_.size());
    for (const auto& [name, _] : adjacency_) out.push_back(name);
    return out;
}

}  // namespace vts
