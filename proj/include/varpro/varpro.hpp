#pragma once

// Umbrella header: variable-projection fitting of separable models
// y ~ sum_j a_j f_j(x, b) with exact inner linear least squares, a Newton
// optimizer with adaptive steepest-descent fallback for b, and optional
// Gaussian priors.

#include "varpro/datagen.hpp"     // IWYU pragma: export
#include "varpro/ensemble.hpp"    // IWYU pragma: export
#include "varpro/errors.hpp"      // IWYU pragma: export
#include "varpro/expr.hpp"        // IWYU pragma: export
#include "varpro/fit.hpp"         // IWYU pragma: export
#include "varpro/linalg.hpp"      // IWYU pragma: export
#include "varpro/model.hpp"       // IWYU pragma: export
#include "varpro/newton.hpp"      // IWYU pragma: export
#include "varpro/numdiff.hpp"     // IWYU pragma: export
#include "varpro/prior.hpp"       // IWYU pragma: export
