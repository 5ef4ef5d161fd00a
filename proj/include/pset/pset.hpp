#pragma once

#include "pset/analysis.hpp"
#include "pset/count.hpp"
#include "pset/errors.hpp"
#include "pset/io.hpp"
#include "pset/random.hpp"
#include "pset/sampler.hpp"
#include "pset/structures.hpp"
#include "pset/tuning.hpp"
#include "pset/verify.hpp"
