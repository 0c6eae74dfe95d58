#pragma once

#include "cdecomp/bvn.hpp"
#include "cdecomp/covariance.hpp"
#include "cdecomp/data.hpp"
#include "cdecomp/decomposition.hpp"
#include "cdecomp/design.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/io.hpp"
#include "cdecomp/joint.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/optimize.hpp"
#include "cdecomp/oracle.hpp"
#include "cdecomp/parallel.hpp"
#include "cdecomp/regression.hpp"
#include "cdecomp/rng.hpp"
#include "cdecomp/scenario.hpp"
#include "cdecomp/study.hpp"
