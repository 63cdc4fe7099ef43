#pragma once

#include <cstdint>

#include "olqr/errors.hpp"
#include "olqr/rng.hpp"

namespace olqr {

// Role of a random stream inside one trial. Streams for different purposes
// must never alias, otherwise algorithm randomness would perturb the noise
// realization and break replay-based diagnostics.
enum class Purpose : std::uint64_t {
  process_noise = 1,  // w_t
  action_noise = 2,   // warm-up eta_t / exploration xi_t
  sign_draw = 3,      // lower-bound chi
  bootstrap = 4,      // resampling in fits
  generator = 5,      // random system construction
  calibration = 6,    // perturbation sampling
  init = 7,           // initial state, when randomized
};

// Injective packing of (T, seed, purpose) into one 64-bit stream id:
// bits [40,64) hold T, bits [8,40) the seed index, bits [0,8) the purpose.
// Together with the experiment-level base seed this gives every trial and
// purpose its own counter-based stream, independent of worker scheduling.
inline std::uint64_t make_stream_id(long long T, long long seed, Purpose p) {
  if (T < 0 || T >= (1ll << 24))
    throw ConfigError("horizon out of stream-id range [0, 2^24)");
  if (seed < 0 || seed >= (1ll << 32))
    throw ConfigError("seed index out of stream-id range [0, 2^32)");
  return (static_cast<std::uint64_t>(T) << 40) |
         (static_cast<std::uint64_t>(seed) << 8) | static_cast<std::uint64_t>(p);
}

inline RngStream make_stream(std::uint64_t base_seed, long long T, long long seed,
                             Purpose p) {
  return RngStream(base_seed, make_stream_id(T, seed, p));
}

}  // namespace olqr
