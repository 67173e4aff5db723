#pragma once

#include <leinert/bounds.hpp>
#include <leinert/census.hpp>
#include <leinert/exact.hpp>
#include <leinert/group.hpp>
#include <leinert/growth.hpp>
#include <leinert/parallel.hpp>
#include <leinert/rng.hpp>
#include <leinert/sampler.hpp>
#include <leinert/series.hpp>
#include <leinert/spectral.hpp>
#include <leinert/walk_tables.hpp>
