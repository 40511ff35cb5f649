// Copyright 2026 The snapseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNAPSEQ_RNG_H
#define SNAPSEQ_RNG_H

#include <cstdint>
#include <random>

namespace snapseq {

/// Seeded generator with platform-independent output.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so uniform and normal variates are derived here
/// directly from the raw 64-bit stream. Bump kVersion whenever the mapping
/// from seed to variates changes; it is recorded in sequence metadata.
class Rng {
   public:
    static constexpr int kVersion = 1;
    static constexpr const char *kName = "mt19937_64/boxmuller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (lo, hi].
    double uniform_open_closed(double lo, double hi);
    /// Standard normal.
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

   private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace snapseq

#endif
