#pragma once

#include "mkdvlab/errors.hpp"
#include "mkdvlab/evolve.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/hessian.hpp"
#include "mkdvlab/hierarchy.hpp"
#include "mkdvlab/linops.hpp"
#include "mkdvlab/optimize.hpp"
#include "mkdvlab/parallel.hpp"
#include "mkdvlab/solitons.hpp"
#include "mkdvlab/spectral.hpp"
#include "mkdvlab/version.hpp"
