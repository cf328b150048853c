#pragma once

// Counter-based random number streams (Philox4x32-10, Salmon et al. SC'11).
//
// Every stream is fully determined by (seed, stream id, draw counter), so
// replicas can run on any thread schedule and still produce identical draws.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace kla {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct PhiloxBlock {
  std::uint32_t c[4];
};

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr.c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr.c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {{hi1 ^ ctr.c[1] ^ k0, lo1, hi0 ^ ctr.c[3] ^ k1, lo0}};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

// One independent stream of uniforms/normals. The 128-bit Philox counter is
// (draw block, stream id); the key is the 64-bit master seed.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    const std::uint64_t bits = next64();
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  void fill_normal(Vec& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
  }

  Vec normal_vec(Eigen::Index n) {
    Vec out(n);
    fill_normal(out);
    return out;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t blocks_used() const { return block_; }

 private:
  std::uint64_t next64() {
    if (pos_ >= 4) {
      const PhiloxBlock ctr = {{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32)}};
      buf_ = philox4x32_10(ctr, static_cast<std::uint32_t>(seed_),
                           static_cast<std::uint32_t>(seed_ >> 32));
      ++block_;
      pos_ = 0;
    }
    const std::uint64_t lo = buf_.c[pos_];
    const std::uint64_t hi = buf_.c[pos_ + 1];
    pos_ += 2;
    return (hi << 32) | lo;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxBlock buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kla
