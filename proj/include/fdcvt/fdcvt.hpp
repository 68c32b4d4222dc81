#pragma once

// Homoscedasticity testing for fixed-design linear regression, valid when
// the covariate count grows with the sample size.

#include "fdcvt/csv.hpp"
#include "fdcvt/design.hpp"
#include "fdcvt/errors.hpp"
#include "fdcvt/functionals.hpp"
#include "fdcvt/hetero_test.hpp"
#include "fdcvt/linalg.hpp"
#include "fdcvt/moments.hpp"
#include "fdcvt/oracle.hpp"
#include "fdcvt/parallel.hpp"
#include "fdcvt/rng.hpp"
#include "fdcvt/sim.hpp"
#include "fdcvt/stats.hpp"
