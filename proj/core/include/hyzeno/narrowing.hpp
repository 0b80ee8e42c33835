#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyzeno/stability.hpp"

namespace hyzeno {

/// One link A_i of a chain A_n ⊂ ... ⊂ A_1 ⊂ A_0 = C ∪ D, with the
/// certificate for A_i on H ∩ A_{i-1} and where to sample it.
struct NarrowingStage {
  LyapunovCertificate cert;  // cert.set is A_i
  SampleSpec grid;
};

struct Chain {
  std::vector<NarrowingStage> stages;
};

/// {"stages": [certificate, ...]}; every certificate must carry a grid.
Chain parse_chain(const SystemData& sys, std::string_view json_text);

enum class NarrowingVerdict {
  UGpASoZConsistent,     // every sampled run outside A_i is Zeno with a convergent ω-estimate
  UGSoZGpAoZConsistent,  // some runs instead reach A_i in finite hybrid time
  Fail,
};

std::string_view to_string(NarrowingVerdict v);

struct StageReport {
  std::size_t index = 0;  // i, 1-based
  LyapunovReport lyapunov;
  std::size_t restricted_jump_samples = 0;  // samples of D ∩ A_{i-1}
  std::size_t nesting_samples = 0;          // members of A_i checked against A_{i-1}
  std::size_t runs = 0;                     // samples of A_{i-1} \ A_i simulated
  std::size_t zeno_runs = 0;
  std::size_t reaching_runs = 0;
  std::size_t failed_runs = 0;
  double max_omega_distance = 0.0;  // largest |ω-point|_{A_i}
  std::optional<TrajectoryWitness> witness;
  std::vector<std::string> notes;
};

struct NarrowingReport {
  NarrowingVerdict verdict = NarrowingVerdict::Fail;
  std::size_t K = 0;  // Zeno count after which attraction is uniform
  std::vector<StageReport> stages;
  std::optional<std::size_t> failed_stage;
  std::string message;
};

struct NarrowingOptions {
  SimConfig sim;
  OmegaConfig omega;
  LyapunovOptions lyapunov;
  std::size_t max_runs_per_stage = 32;
  double reach_tol = 1e-6;  // range counts as meeting A_i within this distance
};

/// Throws Error(ChainNotNested) if a sampled member of A_i lies outside A_{i-1}.
NarrowingReport sequential_narrowing(const SystemData& sys, const Chain& chain, const NarrowingOptions& opts = {});

}  // namespace hyzeno
