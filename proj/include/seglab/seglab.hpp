#pragma once

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/pucci.hpp"
#include "seglab/solver.hpp"
#include "seglab/barriers.hpp"
#include "seglab/analysis.hpp"
#include "seglab/io.hpp"
#include "seglab/config.hpp"
#include "seglab/run.hpp"
#include "seglab/verify.hpp"
