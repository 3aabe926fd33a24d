#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "geopose/core.hpp"

// Deterministic random numbers. The standard distributions are
// implementation-defined, so uniform/normal draws are derived from raw
// mt19937_64 output to keep scenes bit-identical across platforms.

namespace geopose {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mixes a base seed with a stream id so sub-generators stay independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; no cached spare so draw order stays obvious.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vec3 normal_vec3(double sigma) { return Vec3(normal(), normal(), normal()) * sigma; }

    // Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // Uniformly random rotation via normalized quaternion.
    Mat3 rotation() {
        Eigen::Quaterniond q(normal(), normal(), normal(), normal());
        q.normalize();
        return q.toRotationMatrix();
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace geopose
