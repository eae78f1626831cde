#pragma once

#include "gfra/pilot_amp.hpp"
#include "gfra/rng.hpp"
#include "gfra/types.hpp"

namespace gfra {

// Common codebook for the non-coherent baseline: 2^b_bits x len, i.i.d.
// complex Gaussian entries with rows normalized to energy len. b_bits is
// capped at 14 to keep the codebook tractable.
MatrixXcd build_codebook(int b_bits, int len, Rng& rng);

// MMV support detection over the effective channel of Y = Gtilde C + W;
// returns the ka highest-support codeword indices (list-size decoding),
// 0-based, sorted.
std::vector<int> codeword_detect(const MatrixXcd& Y, const MatrixXcd& C, int ka,
                                 PilotAmpOptions opt = {});

}  // namespace gfra
