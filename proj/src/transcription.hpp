#pragma once

#include <string>

#include "heatchain/mam.hpp"

namespace heatchain {

struct TranscriptionOutcome {
  Mat control;
  int iterations = 0;
  std::string message;
};

/// Direct transcription of the control problem on the uniform grid of u0 (N + 1 rows).
/// `states0` (N + 1 rows) seeds the state unknowns; when empty, the trajectory of u0 is used.
TranscriptionOutcome transcribe(const ModelParams& m, const State& x, const State& y, double T, const Mat& u0,
                                const Mat& states0, const MamOptions& opts);

}  // namespace heatchain
