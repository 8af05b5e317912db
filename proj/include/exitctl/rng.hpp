#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace exitctl {

// Philox4x32-10 counter-based generator. A trajectory
// owns a key (its seed); the counter is the step index, so the noise used at
// step k never depends on how many numbers earlier steps consumed.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Open interval (0, 1); only 52 of the bits are used so the top value stays below 1.
constexpr double bits_to_open_unit(std::uint64_t bits53) {
  return (static_cast<double>(bits53 >> 1) + 0.5) * 0x1.0p-52;
}

// Inverse standard normal CDF, Wichura's AS241 (PPND16); relative accuracy
// about 1e-16 over (0, 1).
inline double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    z = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  return q < 0 ? -z : z;
}

// Random numbers addressed by (seed, step, slot). Philox block j of a step
// yields uniforms for slots 2j and 2j+1, so the value in a slot never depends
// on how many slots are read.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : key_(Philox4x32::key_from_seed(seed)) {}

  void uniforms(std::uint64_t step, std::span<double> out) const {
    const auto lo = static_cast<std::uint32_t>(step);
    const auto hi = static_cast<std::uint32_t>(step >> 32);
    for (std::size_t j = 0; 2 * j < out.size(); ++j) {
      const auto r = Philox4x32::generate({lo, hi, static_cast<std::uint32_t>(j), 0u}, key_);
      out[2 * j] = bits_to_open_unit(((std::uint64_t{r[0]} << 32) | r[1]) >> 11);
      if (2 * j + 1 < out.size()) out[2 * j + 1] = bits_to_open_unit(((std::uint64_t{r[2]} << 32) | r[3]) >> 11);
    }
  }

  // Independent N(0,1) draws for step `step`, by inversion slot by slot.
  void normals(std::uint64_t step, std::span<double> out) const {
    uniforms(step, out);
    for (double& v : out) v = inverse_normal_cdf(v);
  }

 private:
  Philox4x32::Key key_;
};

// SplitMix64 finalizer, used to derive per-iteration seed bases.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace exitctl
