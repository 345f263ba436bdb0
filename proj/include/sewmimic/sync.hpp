#pragma once

// Calibration-free mapping of raw stream keypoints into the body-centric
// frame built from the two shoulders and a torso anchor.

#include <optional>

#include "sewmimic/geometry.hpp"
#include "sewmimic/retarget.hpp"

namespace sewmimic {

/// One arm as delivered by a tracker, in stream coordinates.
struct RawArm {
    Vec3 s;
    Vec3 e;
    Vec3 w;
    std::optional<Rot3> hand;  // index/palm/thumb frame, if the tracker provides one
    std::optional<Vec3> index;  // index finger root
    std::optional<Vec3> pinky;  // pinky finger root
};

struct RawFrame {
    double t = 0.0;
    Vec3 torso;  // torso anchor below the shoulders
    RawArm left;
    RawArm right;
};

struct SyncOptions {
    /// Right-multiplied correction for tracker hand frames.
    Rot3 hand_align_left;
    Rot3 hand_align_right;
    /// Maps make_frame(index, pinky, wrist) onto the index/palm/thumb convention.
    Rot3 finger_align = Rot3::from_columns(Vec3::unit_z(), Vec3::unit_x(), Vec3::unit_y());
};

struct BimanualInput {
    HumanInput left;
    HumanInput right;
};

/// Body-centric frame of a raw frame; throws DegenerateError if the
/// shoulders and torso anchor are collinear.
inline Frame body_frame(const RawFrame& raw) { return make_frame(raw.left.s, raw.right.s, raw.torso); }

namespace detail {

inline HumanInput sync_arm(const RawArm& a, const Frame& body, const Rot3& hand_align, const Rot3& finger_align) {
    const Frame stream = Frame::identity();
    HumanInput out;
    out.s = transform_point(a.s, stream, body);
    out.e = transform_point(a.e, stream, body);
    out.w = transform_point(a.w, stream, body);
    Rot3 hand;
    if (a.hand) {
        hand = *a.hand * hand_align;
    } else if (a.index && a.pinky) {
        hand = make_frame(*a.index, *a.pinky, a.w).orientation * finger_align;
    } else {
        throw ParseError("arm has neither a hand orientation nor finger keypoints");
    }
    out.H = body.orientation.transpose() * hand;
    return out;
}

}  // namespace detail

inline BimanualInput sync_frames(const RawFrame& raw, const SyncOptions& opt = {}) {
    const Frame body = body_frame(raw);
    return {detail::sync_arm(raw.left, body, opt.hand_align_left, opt.finger_align),
            detail::sync_arm(raw.right, body, opt.hand_align_right, opt.finger_align)};
}

}  // namespace sewmimic
