#include "bodyctl/keypoints.hpp"

namespace bodyctl {

std::optional<Keypoint> keypoint_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kKeypointCount; ++i) {
        if (kKeypointNames[i] == name) return keypoint_at(i);
    }
    return std::nullopt;
}

std::optional<Side> side_of(Keypoint k)
{
    if (k == Keypoint::nose) return std::nullopt;
    // after nose the names alternate left/right
    return (index_of(k) % 2 == 1) ? Side::left : Side::right;
}

bool is_lower_body(Keypoint k) { return index_of(k) >= index_of(Keypoint::left_hip); }

Keypoint shoulder_of(Side s) { return s == Side::left ? Keypoint::left_shoulder : Keypoint::right_shoulder; }
Keypoint hip_of(Side s) { return s == Side::left ? Keypoint::left_hip : Keypoint::right_hip; }

} // namespace bodyctl
