#pragma once

#include "cylflow/construction.hpp"
#include "cylflow/dynamics.hpp"
#include "cylflow/geometry.hpp"
#include "cylflow/io.hpp"
#include "cylflow/potential.hpp"
#include "cylflow/run_config.hpp"
#include "cylflow/version.hpp"
