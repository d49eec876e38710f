#pragma once

#include "normseq/models/checkpoint.hpp"
#include "normseq/nn/gradcheck.hpp"

namespace normseq {

// Builds a small instance of the given architecture on random data (dropout
// off) and central-difference-checks every analytic gradient. Shared by the
// gradcheck CLI command and the acceptance suite.
nn::GradCheckReport model_gradcheck(ModelKind kind, unsigned long long seed);

}  // namespace normseq
