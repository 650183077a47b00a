#pragma once

// Recovery-rate cells: planted secrets with a fixed number of cruel and cool
// nonzeros, cruel bits assumed known, cool bits recovered by each method over
// a streamed synthetic data set. One cell = one (profile, weights, rows)
// combination; all its secrets share the same a vectors.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sparselwe/recovery.hpp"
#include "sparselwe/reduction.hpp"

namespace sparselwe {

struct CellSpec {
  ReductionProfile profile;
  std::size_t h_cool = 0;
  std::size_t h_total = 0;  // cruel weight = h_total - h_cool
  std::size_t rows = 0;
  std::size_t secrets = 20;
  std::vector<RecoveryMethod> methods{RecoveryMethod::linear, RecoveryMethod::stepwise,
                                      RecoveryMethod::dual};
  SecretKind alphabet = SecretKind::binary;
  std::uint64_t seed = 0;

  /// Stable label used for seeding and manifests.
  [[nodiscard]] std::string key() const;
};

struct CellResult {
  std::map<RecoveryMethod, std::size_t> successes;
  std::size_t secrets = 0;
  std::size_t passes = 0;
};

/// Secret with exactly h_total - h_cool cruel and h_cool cool nonzeros.
Secret planted_secret(const ReductionProfile& profile, std::size_t h_cool, std::size_t h_total,
                      SecretKind alphabet, SeededRng rng);

/// Runs every (secret, method) pair of the cell in lockstep over one stream.
/// on_round receives (round, pending requests).
CellResult run_cell(const CellSpec& spec,
                    const std::function<void(std::size_t, std::size_t)>& on_round = {});

}  // namespace sparselwe
