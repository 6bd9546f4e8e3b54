#pragma once

// Umbrella header for the bivirus library.

#include "bivirus/cases.hpp"
#include "bivirus/equilibria.hpp"
#include "bivirus/errors.hpp"
#include "bivirus/io.hpp"
#include "bivirus/model.hpp"
#include "bivirus/report.hpp"
#include "bivirus/sim.hpp"
#include "bivirus/speclin.hpp"
