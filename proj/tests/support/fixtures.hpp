#pragma once

#include "alviz/al_engine.hpp"

namespace alviz::testing {

// Small deterministic run shared by the plotting and serving tests.
inline RunArtifact small_run(std::uint64_t seed = 1, Index batch = 10, Index batches = 5) {
  ExperimentConfig c;
  c.batch_size = batch;
  c.num_batches = batches;
  c.seed = seed;
  c.data_source = "synthetic:piecewise_constant";
  c.target = "y";
  return run_experiment(c, make_synthetic(SyntheticKind::piecewise_constant, 300, 3, 0.3, seed));
}

}  // namespace alviz::testing
