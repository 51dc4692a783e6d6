#pragma once

#include <array>

#include "occdet/geometry.hpp"

namespace occdet {

/// Normalized regression offsets (x, y, width, height) of a box relative to
/// an RoI: center shift over RoI size and log size ratio.
struct BoxDeltas {
    std::array<double, 4> t{};

    double& operator[](std::size_t k) { return t[k]; }
    double operator[](std::size_t k) const { return t[k]; }
    bool finite() const;

    friend bool operator==(const BoxDeltas&, const BoxDeltas&) = default;
};

enum class Sign { Neg, Pos };

/// Direction class per dimension; Neg covers t <= 0.
struct SignTargets {
    std::array<Sign, 4> s{};

    Sign operator[](std::size_t k) const { return s[k]; }

    friend bool operator==(const SignTargets&, const SignTargets&) = default;
};

/// Throws std::invalid_argument when either box has zero width or height.
BoxDeltas encode(const Box& roi, const Box& gt);

/// Inverse of encode. Throws std::invalid_argument on a degenerate RoI or
/// non-finite deltas.
Box decode(const Box& roi, const BoxDeltas& d);

SignTargets sign_targets(const BoxDeltas& t_star);

/// Intersection of `b` with [0,width] x [0,height].
Box clip_to_image(const Box& b, double width, double height);

}  // namespace occdet
