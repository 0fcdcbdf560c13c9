#pragma once

// Unified car-following / ACC modelling library: base controllers, physics
// extensions, ballistic simulation, goodness-of-fit scoring, GA calibration
// and the cross-validation experiment pipeline.

#include "accsim/bounds.hpp"
#include "accsim/calibration.hpp"
#include "accsim/controllers.hpp"
#include "accsim/csv_io.hpp"
#include "accsim/errors.hpp"
#include "accsim/experiments.hpp"
#include "accsim/ga.hpp"
#include "accsim/gof.hpp"
#include "accsim/models.hpp"
#include "accsim/parallel.hpp"
#include "accsim/params.hpp"
#include "accsim/physics.hpp"
#include "accsim/series.hpp"
#include "accsim/simulator.hpp"
#include "accsim/trajectory.hpp"
