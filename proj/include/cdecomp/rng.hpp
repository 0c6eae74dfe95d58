#pragma once

#include <cstdint>
#include <random>

#include "cdecomp/normal.hpp"

namespace cdecomp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Hierarchical counter-based stream ids. A stream is identified by a master
// seed plus a path of integer ids; each path element is folded into the state
// with splitmix64, so sibling and nested streams are statistically independent
// and the mapping is reproducible across platforms, runs, and worker counts.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(detail::splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    RngStream child(std::uint64_t id) const {
        RngStream s(*this);
        s.state_ = detail::splitmix64(s.state_ ^ detail::splitmix64(id ^ 0xda942042e4dd58b5ULL));
        return s;
    }

    RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
    RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    std::uint64_t state() const noexcept { return state_; }

  private:
    std::uint64_t state_;
};

// Draws from one stream. mt19937_64 output is fully specified by the standard;
// uniforms take the top 53 bits and normals go through the inverse CDF, so the
// produced sequences are bit-identical everywhere. std::*_distribution is
// deliberately avoided (implementation-defined output).
class Sampler {
  public:
    explicit Sampler(const RngStream& stream) : eng_(stream.state()) {}

    std::uint64_t next_u64() { return eng_(); }

    // Strictly inside (0,1): (x >> 11) spans [0, 2^53), offset by 1/2 ulp.
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return norm_quantile(uniform01()); }

    // Uniform index in [0, m). Modulo bias is < m/2^64, far below any
    // tolerance in play, and keeps the sequence consumption fixed at one draw.
    std::size_t below(std::size_t m) { return static_cast<std::size_t>(eng_() % m); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace cdecomp
