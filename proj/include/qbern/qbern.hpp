#pragma once

/* Umbrella header: q-calculus primitives, exact polynomial certificates,
 * q-Pochhammer products, q-exponential series, Jackson derivative, the
 * q-Bernoulli inequality margins, and the verification drivers. */

#include "bernoulli.hpp"
#include "core.hpp"
#include "derivative.hpp"
#include "errors.hpp"
#include "pochhammer.hpp"
#include "poly.hpp"
#include "report.hpp"
#include "series.hpp"
#include "verify.hpp"
