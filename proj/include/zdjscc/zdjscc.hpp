#pragma once

// Zero-delay joint source-channel coding of a correlated Gaussian pair over
// a Gaussian adder channel: closed-form performance bound, two distributed
// codecs with analytical distortion models, parameter optimizers, and a
// reproducible Monte Carlo harness.

#include "zdjscc/bounds.hpp"
#include "zdjscc/core.hpp"
#include "zdjscc/gaussian.hpp"
#include "zdjscc/io.hpp"
#include "zdjscc/montecarlo.hpp"
#include "zdjscc/nq.hpp"
#include "zdjscc/optimize.hpp"
#include "zdjscc/quadrature.hpp"
#include "zdjscc/random.hpp"
#include "zdjscc/sqlc.hpp"
