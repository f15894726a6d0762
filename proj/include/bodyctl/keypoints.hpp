#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace bodyctl {

// COCO 17-keypoint order. The enum value is the canonical serialization index.
enum class Keypoint : std::uint8_t {
    nose,
    left_eye,
    right_eye,
    left_ear,
    right_ear,
    left_shoulder,
    right_shoulder,
    left_elbow,
    right_elbow,
    left_wrist,
    right_wrist,
    left_hip,
    right_hip,
    left_knee,
    right_knee,
    left_ankle,
    right_ankle,
};

inline constexpr std::size_t kKeypointCount = 17;

inline constexpr std::array<std::string_view, kKeypointCount> kKeypointNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",    "right_ear",  "left_shoulder",
    "right_shoulder", "left_elbow",    "right_elbow", "left_wrist", "right_wrist", "left_hip",
    "right_hip",     "left_knee",      "right_knee", "left_ankle",  "right_ankle",
};

constexpr std::size_t index_of(Keypoint k) { return static_cast<std::size_t>(k); }
constexpr Keypoint keypoint_at(std::size_t i) { return static_cast<Keypoint>(i); }
constexpr std::string_view name_of(Keypoint k) { return kKeypointNames[index_of(k)]; }

std::optional<Keypoint> keypoint_from_name(std::string_view name);

enum class Side { left, right };

/// Body side of a keypoint; nose has none.
std::optional<Side> side_of(Keypoint k);

/// True for hips, knees and ankles.
bool is_lower_body(Keypoint k);

Keypoint shoulder_of(Side s);
Keypoint hip_of(Side s);

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

} // namespace bodyctl
