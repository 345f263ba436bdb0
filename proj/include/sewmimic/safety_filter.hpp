#pragma once

// Bimanual self-collision filter. Robot keypoints (s, e, w, t per arm) are
// wrapped in capsules, pushed apart with XPBD contact constraints, projected
// back to the link lengths, and mapped back to joints with sew_mimic.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "sewmimic/capsule.hpp"
#include "sewmimic/retarget.hpp"
#include "sewmimic/robot_model.hpp"

namespace sewmimic {

struct BimanualModel {
    RobotArmModel left;
    RobotArmModel right;
};

struct BimanualPose {
    JointVector left;
    JointVector right;

    friend bool operator==(const BimanualPose&, const BimanualPose&) = default;
};

/// Positions the filter may move: shoulder, elbow, wrist and tool tip of
/// each arm. Capsules share these, so adjacent links stay connected.
struct ArmKeypoints {
    Vec3 s, e, w, t;
};

struct BimanualKeypoints {
    ArmKeypoints left;
    ArmKeypoints right;
};

inline ArmKeypoints arm_keypoints(const RobotArmModel& m, const JointVector& q) {
    const RobotKeypoints k = fk(m, q);
    return {k.s, k.e, k.w, k.t};
}

inline BimanualKeypoints bimanual_keypoints(const BimanualModel& m, const BimanualPose& q) {
    return {arm_keypoints(m.left, q.left), arm_keypoints(m.right, q.right)};
}

/// Per-keypoint XPBD weights (inverse masses). Zero anchors a keypoint.
struct KeypointWeights {
    double shoulder = 0.0;
    double elbow = 1.0;
    double wrist = 1.0;
    double tool = 1.0;
};

struct FilterParams {
    double d_min = 0.01;  // safety margin, m
    double d_act = 0.02;  // activation distance, m
    double d_rel = 0.05;  // release distance, m
    double alpha = 1e-4;  // compliance
    int n_iter = 20;
    double length_eps = 1e-9;  // links shorter than this are not length-projected
    /// Length projection repeats its sweep until every link is within
    /// length_tol of its robot length, at most length_sweeps times.
    double length_tol = 1e-6;
    int length_sweeps = 50;
    /// Slack on d_min when deciding that an iterate is collision-free.
    double free_tolerance = 1e-3;
    KeypointWeights weights;

    void validate() const {
        if (!(0.0 <= d_min && d_min <= d_act && d_act <= d_rel)) {
            throw InvariantError("filter params: require 0 <= d_min <= d_act <= d_rel");
        }
        if (!(alpha >= 0.0)) throw InvariantError("filter params: alpha must be >= 0");
        if (n_iter < 1) throw InvariantError("filter params: n_iter must be >= 1");
        if (length_sweeps < 1) throw InvariantError("filter params: length_sweeps must be >= 1");
        if (!(length_tol > 0.0)) throw InvariantError("filter params: length_tol must be > 0");
        if (!(length_eps >= 0.0) || !(free_tolerance >= 0.0)) {
            throw InvariantError("filter params: tolerances must be >= 0");
        }
        const auto& w = weights;
        if (!(w.shoulder >= 0 && w.elbow >= 0 && w.wrist >= 0 && w.tool >= 0)) {
            throw InvariantError("filter params: weights must be >= 0");
        }
    }
};

inline constexpr std::size_t kNumCapsules = 7;

/// The seven link capsules in CapsuleTag order, plus static extras.
struct CapsuleSet {
    std::array<Capsule, kNumCapsules> links{};
    std::vector<Capsule> fixed;

    const Capsule& operator[](std::size_t i) const { return i < kNumCapsules ? links[i] : fixed[i - kNumCapsules]; }
    std::size_t size() const { return kNumCapsules + fixed.size(); }
};

inline CapsuleSet make_capsules(const BimanualModel& m, const BimanualKeypoints& k) {
    CapsuleSet c;
    const auto& rl = m.left.radii;
    const auto& rr = m.right.radii;
    c.links[0] = {m.right.torso.p1, m.right.torso.p2, rr.torso, CapsuleTag::torso};
    c.links[1] = {k.left.s, k.left.e, rl.upper, CapsuleTag::upper_left};
    c.links[2] = {k.right.s, k.right.e, rr.upper, CapsuleTag::upper_right};
    c.links[3] = {k.left.e, k.left.w, rl.lower, CapsuleTag::lower_left};
    c.links[4] = {k.right.e, k.right.w, rr.lower, CapsuleTag::lower_right};
    c.links[5] = {k.left.w, k.left.t, rl.hand, CapsuleTag::hand_left};
    c.links[6] = {k.right.w, k.right.t, rr.hand, CapsuleTag::hand_right};
    for (const auto* model : {&m.left, &m.right}) {
        for (const auto& x : model->extra_capsules) c.fixed.push_back({x.p1, x.p2, x.radius, CapsuleTag::fixed});
    }
    return c;
}

/// Capsule index pairs that are checked: everything except links that share
/// a joint (torso/upper, upper/lower, lower/hand on the same side). Static
/// extras are checked against the lower arms and hands.
inline std::vector<std::pair<std::size_t, std::size_t>> collision_pairs(std::size_t n_fixed = 0) {
    using T = CapsuleTag;
    auto adjacent = [](T a, T b) {
        auto is = [&](T x, T y) { return (a == x && b == y) || (a == y && b == x); };
        return is(T::torso, T::upper_left) || is(T::torso, T::upper_right) || is(T::upper_left, T::lower_left) ||
               is(T::upper_right, T::lower_right) || is(T::lower_left, T::hand_left) ||
               is(T::lower_right, T::hand_right);
    };
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < kNumCapsules; ++i) {
        for (std::size_t j = i + 1; j < kNumCapsules; ++j) {
            if (!adjacent(static_cast<T>(i), static_cast<T>(j))) out.emplace_back(i, j);
        }
    }
    for (std::size_t f = 0; f < n_fixed; ++f) {
        for (std::size_t i = 3; i < kNumCapsules; ++i) out.emplace_back(i, kNumCapsules + f);
    }
    return out;
}

struct PairDistance {
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
};

inline std::vector<PairDistance> pair_distances(const CapsuleSet& c) {
    std::vector<PairDistance> out;
    for (const auto& [i, j] : collision_pairs(c.fixed.size())) out.push_back({i, j, collision_check(c[i], c[j]).d});
    return out;
}

inline double min_distance(const CapsuleSet& c) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pair_distances(c)) m = std::min(m, p.d);
    return m;
}

inline bool in_collision(const CapsuleSet& c) { return min_distance(c) < 0.0; }

inline BimanualKeypoints lerp(const BimanualKeypoints& a, const BimanualKeypoints& b, double f) {
    auto mix = [f](const Vec3& x, const Vec3& y) { return x + f * (y - x); };
    auto arm = [&](const ArmKeypoints& p, const ArmKeypoints& q) {
        return ArmKeypoints{mix(p.s, q.s), mix(p.e, q.e), mix(p.w, q.w), mix(p.t, q.t)};
    };
    return {arm(a.left, b.left), arm(a.right, b.right)};
}

struct FirstCollision {
    BimanualKeypoints keypoints;
    int n_interp = 1;
    int index = 1;  // 1-based interpolant returned
    bool collided = false;
};

/// Linear keypoint interpolation from fk(q0) to fk(q_des); returns the first
/// interpolant in collision, or the desired keypoints if none is.
inline FirstCollision find_first_collision(const BimanualModel& m, const BimanualPose& q0, const BimanualPose& q_des) {
    const BimanualKeypoints k0 = bimanual_keypoints(m, q0);
    const BimanualKeypoints k1 = bimanual_keypoints(m, q_des);

    double steps = 0.0;
    auto consider = [&](const ArmKeypoints& a, const ArmKeypoints& b, const CapsuleRadii& r) {
        steps = std::max(steps, norm(b.s - a.s) / r.upper);
        steps = std::max(steps, norm(b.e - a.e) / std::min(r.upper, r.lower));
        steps = std::max(steps, norm(b.w - a.w) / std::min(r.lower, r.hand));
        steps = std::max(steps, norm(b.t - a.t) / r.hand);
    };
    consider(k0.left, k1.left, m.left.radii);
    consider(k0.right, k1.right, m.right.radii);

    FirstCollision out;
    out.n_interp = std::max(1, static_cast<int>(std::ceil(steps)));
    for (int i = 1; i <= out.n_interp; ++i) {
        const BimanualKeypoints k =
            i == out.n_interp ? k1 : lerp(k0, k1, static_cast<double>(i) / static_cast<double>(out.n_interp));
        if (in_collision(make_capsules(m, k))) {
            out.keypoints = k;
            out.index = i;
            out.collided = true;
            return out;
        }
    }
    out.keypoints = k1;
    out.index = out.n_interp;
    return out;
}

/// Hysteresis gate: false when the pair is released (λ must reset to 0).
inline bool contact_engaged(double d, double lambda, const FilterParams& p) {
    return !(d >= p.d_rel || (d >= p.d_act && lambda == 0.0));
}

enum class LinkKind { fixed, upper, distal };

/// Mutable view of the keypoints behind one capsule.
struct ContactBody {
    Vec3* p1 = nullptr;
    Vec3* p2 = nullptr;
    double w1 = 0.0;
    double w2 = 0.0;
    LinkKind kind = LinkKind::fixed;
};

/// XPBD update for one collision pair. Returns the new multiplier and moves
/// the keypoints behind `a` and `b`.
inline double xpbd_contact_step(const ContactBody& a, const ContactBody& b, const ContactResult& contact,
                                double lambda, const FilterParams& p, bool* moved = nullptr) {
    if (!contact_engaged(contact.d, lambda, p)) return 0.0;
    const double c = contact.d - p.d_min;
    if (c >= 0.0) return lambda;

    // Gradients point away from the other capsule (−n), so a positive
    // multiplier separates the pair.
    struct Move {
        Vec3* at;
        double w;
        Vec3 g;
    };
    std::array<Move, 4> moves{};
    std::size_t n_moves = 0;
    auto accumulate = [&](const ContactBody& body, const Vec3& normal) {
        if (body.kind == LinkKind::upper) {
            // Only the elbow end of an upper arm moves.
            moves[n_moves++] = {body.p2, body.w2, -normal};
        } else if (body.kind == LinkKind::distal) {
            moves[n_moves++] = {body.p1, body.w1, -(1.0 - norm(normal)) * normal};
            moves[n_moves++] = {body.p2, body.w2, -normal};
        }
    };
    accumulate(a, contact.n_i);
    accumulate(b, contact.n_j);
    double sum = 0.0;
    for (std::size_t q = 0; q < n_moves; ++q) sum += moves[q].w * squared_norm(moves[q].g);
    const double denom = p.alpha + sum;
    if (denom <= 0.0) return lambda;

    const double dl = -(c + p.alpha * lambda) / denom;
    const double next = std::max(0.0, lambda + dl);
    const double step = next - lambda;
    for (std::size_t q = 0; q < n_moves; ++q) {
        const Vec3 delta = moves[q].w * step * moves[q].g;
        if (moved && squared_norm(delta) > 0.0) *moved = true;
        *moves[q].at += delta;
    }
    return next;
}

namespace detail {

struct LinkRef {
    ContactBody body;
    double length = 0.0;
};

inline std::array<LinkRef, kNumCapsules> link_refs(const BimanualModel& m, BimanualKeypoints& k, const FilterParams& p) {
    const auto& w = p.weights;
    std::array<LinkRef, kNumCapsules> r{};
    auto arm = [&](ArmKeypoints& a, const RobotArmModel& model, std::size_t u, std::size_t l, std::size_t h) {
        const auto& len = model.limb_lengths;
        r[u] = {{&a.s, &a.e, w.shoulder, w.elbow, LinkKind::upper}, len.upper};
        r[l] = {{&a.e, &a.w, w.elbow, w.wrist, LinkKind::distal}, len.lower};
        r[h] = {{&a.w, &a.t, w.wrist, w.tool, LinkKind::distal}, len.hand};
    };
    arm(k.left, m.left, 1, 3, 5);
    arm(k.right, m.right, 2, 4, 6);
    return r;
}

}  // namespace detail

/// XPBD length projection over the arm links (λ per link starts at 0 on
/// every sweep). Sweeps repeat until all links are within length_tol.
/// Returns the remaining largest length error.
inline double xpbd_length_iter(const BimanualModel& m, BimanualKeypoints& k, const FilterParams& p) {
    auto refs = detail::link_refs(m, k, p);
    double worst = 0.0;
    for (int sweep = 0; sweep < p.length_sweeps; ++sweep) {
        worst = 0.0;
        for (std::size_t i = 1; i < kNumCapsules; ++i) {
            const ContactBody& b = refs[i].body;
            const Vec3 d = *b.p2 - *b.p1;
            const double len = norm(d);
            if (len < p.length_eps) continue;
            const double c = len - refs[i].length;
            worst = std::max(worst, std::abs(c));
            const double denom = p.alpha + b.w1 + b.w2;  // both gradients are unit vectors
            if (denom <= 0.0) continue;
            const double dl = -c / denom;
            const Vec3 g = d / len;
            *b.p1 -= b.w1 * dl * g;
            *b.p2 += b.w2 * dl * g;
        }
        if (worst <= p.length_tol) break;
    }
    return worst;
}

/// One XPBD contact sweep over all collision pairs, followed by a length
/// projection. `lambda` holds one multiplier per collision_pairs() entry.
/// Returns true if any keypoint moved.
inline bool xpbd_iter(const BimanualModel& m, BimanualKeypoints& k, std::vector<double>& lambda, const FilterParams& p) {
    const std::size_t n_fixed = m.left.extra_capsules.size() + m.right.extra_capsules.size();
    const auto pairs = collision_pairs(n_fixed);
    if (lambda.size() != pairs.size()) lambda.assign(pairs.size(), 0.0);
    const auto refs = detail::link_refs(m, k, p);
    bool moved = false;
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto [i, j] = pairs[n];
        const CapsuleSet caps = make_capsules(m, k);
        const ContactResult contact = collision_check(caps[i], caps[j]);
        const ContactBody a = i < kNumCapsules ? refs[i].body : ContactBody{};
        const ContactBody b = j < kNumCapsules ? refs[j].body : ContactBody{};
        lambda[n] = xpbd_contact_step(a, b, contact, lambda[n], p, &moved);
    }
    xpbd_length_iter(m, k, p);
    return moved;
}

/// Rotate T so that its x-axis points along t.
inline Rot3 recover_tool(const Rot3& T, const Vec3& t) {
    const Vec3 ux = T.col(0);
    const Vec3 ut = normalize(t);
    const Vec3 k = cross(ux, ut);
    const double sin_theta = norm(k);
    const double cos_theta = dot(ux, ut);
    if (sin_theta < kDegenerateEps) {
        if (cos_theta > 0.0) return T;
        // Antiparallel: half turn about the coordinate axis most orthogonal to ux.
        int axis = 0;
        for (int i = 1; i < 3; ++i) {
            if (std::abs(ux[i]) < std::abs(ux[axis])) axis = i;
        }
        Vec3 e;
        e[axis] = 1.0;
        return rodrigues(normalize(e - dot(e, ux) * ux), std::numbers::pi) * T;
    }
    return rodrigues(k / sin_theta, std::atan2(sin_theta, cos_theta)) * T;
}

enum class FilterStatus { safe, held };

inline const char* to_string(FilterStatus s) { return s == FilterStatus::safe ? "safe" : "held"; }

struct FilterResult {
    BimanualPose q;
    FilterStatus status = FilterStatus::held;
    /// XPBD moved at least one keypoint, or the path was cut short.
    bool active = false;
    int iterations = 0;
    int n_interp = 1;
    /// Min pairwise signed distance of the output pose.
    double min_distance = 0.0;
    /// Largest keypoint gap between the XPBD result and fk of the re-solved pose.
    double resolve_residual = 0.0;
    /// Largest link-length error of the accepted XPBD keypoints.
    double length_error = 0.0;
    RetargetFlags flags_left;
    RetargetFlags flags_right;
    double seconds = 0.0;
};

/// Collision-free-iterate test used by the filter loop.
inline bool filter_clear(const CapsuleSet& c, const FilterParams& p) {
    return min_distance(c) >= p.d_min - p.free_tolerance;
}

inline FilterResult safety_filter(const BimanualModel& m, const BimanualPose& q0, const BimanualPose& q_des,
                                  const FilterParams& p) {
    const auto start = std::chrono::steady_clock::now();
    FilterResult out;
    const FirstCollision first = find_first_collision(m, q0, q_des);
    out.n_interp = first.n_interp;
    out.active = first.collided && first.index < first.n_interp;

    BimanualKeypoints k = first.keypoints;
    std::vector<double> lambda;
    out.q = q0;
    for (int it = 1; it <= p.n_iter; ++it) {
        out.iterations = it;
        out.active = xpbd_iter(m, k, lambda, p) || out.active;
        if (!filter_clear(make_capsules(m, k), p)) continue;

        auto solve = [&](const RobotArmModel& model, const ArmKeypoints& kp, const JointVector& seed,
                         const JointVector& des, RetargetFlags& flags) {
            const Rot3 H = recover_tool(tool_orientation(model, des), kp.t - kp.w);
            const RetargetResult r = sew_mimic(model, seed, HumanInput{kp.s, kp.e, kp.w, H});
            flags = r.flags;
            const RobotKeypoints back = fk(model, r.q);
            out.resolve_residual = std::max({out.resolve_residual, norm(back.e - kp.e), norm(back.w - kp.w), norm(back.t - kp.t)});
            return r.q;
        };
        for (const auto& [model, kp] : {std::pair{&m.left, &k.left}, std::pair{&m.right, &k.right}}) {
            const auto& len = model->limb_lengths;
            out.length_error = std::max({out.length_error, std::abs(norm(kp->e - kp->s) - len.upper),
                                         std::abs(norm(kp->w - kp->e) - len.lower), std::abs(norm(kp->t - kp->w) - len.hand)});
        }
        out.q.left = solve(m.left, k.left, q0.left, q_des.left, out.flags_left);
        out.q.right = solve(m.right, k.right, q0.right, q_des.right, out.flags_right);
        out.status = FilterStatus::safe;
        break;
    }
    out.min_distance = min_distance(make_capsules(m, bimanual_keypoints(m, out.q)));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace sewmimic
