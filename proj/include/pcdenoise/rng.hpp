// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "pcdenoise/vec3.hpp"

namespace pcdn {

// splitmix64 finalizer, used both to decorrelate raw seeds and to derive
// independent sub-streams from (seed, ordinal).
inline uint64_t mix_seed(uint64_t s) {
    s += 0x9e3779b97f4a7c15ULL;
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
    return s ^ (s >> 31);
}

inline uint64_t derive_stream(uint64_t seed, uint64_t ordinal) {
    return mix_seed(seed ^ mix_seed(ordinal + 1));
}

// Deterministic random source. All sampling is implemented on top of the
// raw mt19937_64 stream rather than <random> distributions, so results are
// reproducible across standard library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(mix_seed(seed)) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive, unbiased via rejection.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<int64_t>(gen_());  // full 64-bit range
        uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return lo + static_cast<int64_t>(v % range);
    }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so the stream consumption is a pure function of call count.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Vec3 normal3() {
        double a = normal();
        double b = normal();
        double c = normal();
        return {a, b, c};
    }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pcdn
