#pragma once

// Divergence estimation between group-invariant distributions:
// exact Wasserstein-1, MMD, and Lipschitz-regularized alpha-divergences,
// with group symmetrization and the sample-complexity experiment harness.

#include "symdiv/errors.hpp"
#include "symdiv/experiments.hpp"
#include "symdiv/falpha.hpp"
#include "symdiv/group.hpp"
#include "symdiv/kernel.hpp"
#include "symdiv/measure.hpp"
#include "symdiv/mmd.hpp"
#include "symdiv/rng.hpp"
#include "symdiv/samplers.hpp"
#include "symdiv/transport.hpp"
#include "symdiv/util.hpp"
#include "symdiv/w1.hpp"
