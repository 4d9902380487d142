// Umbrella header.
#pragma once

#include "pslab/acl.hpp"
#include "pslab/atomicgame.hpp"
#include "pslab/bpd.hpp"
#include "pslab/costs.hpp"
#include "pslab/errors.hpp"
#include "pslab/lp.hpp"
#include "pslab/mechanism.hpp"
#include "pslab/model.hpp"
#include "pslab/numeric.hpp"
#include "pslab/obedience.hpp"
#include "pslab/planner.hpp"
#include "pslab/policy.hpp"
#include "pslab/rng.hpp"
#include "pslab/serialization.hpp"
