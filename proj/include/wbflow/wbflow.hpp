#pragma once

// Numerical core. Serialisation (io.hpp) and the configured pipelines
// (run.hpp) additionally need nlohmann/json on the include path.

#include "wbflow/diagnostics.hpp"
#include "wbflow/dynamic_transport.hpp"
#include "wbflow/energy.hpp"
#include "wbflow/error.hpp"
#include "wbflow/grid.hpp"
#include "wbflow/jko.hpp"
#include "wbflow/measure.hpp"
#include "wbflow/pde_reference.hpp"
#include "wbflow/static_transport.hpp"
#include "wbflow/transportation_simplex.hpp"
