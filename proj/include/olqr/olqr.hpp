#pragma once

#include "olqr/calibrate.hpp"
#include "olqr/errors.hpp"
#include "olqr/estimation.hpp"
#include "olqr/fits.hpp"
#include "olqr/harness.hpp"
#include "olqr/learners.hpp"
#include "olqr/lowerbound.hpp"
#include "olqr/parallel.hpp"
#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"
#include "olqr/simulate.hpp"
#include "olqr/streams.hpp"
#include "olqr/system.hpp"
