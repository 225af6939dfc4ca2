#pragma once

#include "bshmm/conditional.hpp"
#include "bshmm/errors.hpp"
#include "bshmm/hmm.hpp"
#include "bshmm/io.hpp"
#include "bshmm/matrix.hpp"
#include "bshmm/postproc.hpp"
#include "bshmm/prior.hpp"
#include "bshmm/rng.hpp"
#include "bshmm/sampler.hpp"
#include "bshmm/selection.hpp"
#include "bshmm/simgen.hpp"
#include "bshmm/splines.hpp"
#include "bshmm/stats.hpp"
