#pragma once

// Independent high-precision references used to generate and check test
// fixtures. Requires MPFR and GMP at link time.

#include "prabhakar/oracle/quad.hpp"
#include "prabhakar/oracle/series.hpp"
#include "prabhakar/oracle/telegraph_fd.hpp"
