#pragma once

#include "orbmin/error.hpp"
#include "orbmin/smallmat.hpp"
#include "orbmin/numeric.hpp"
#include "orbmin/odeflow.hpp"
#include "orbmin/varcalc.hpp"
#include "orbmin/celestial.hpp"
#include "orbmin/conjoined.hpp"
#include "orbmin/verdict.hpp"
