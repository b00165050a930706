#ifndef NUMPMP_NUMPMP_HPP_
#define NUMPMP_NUMPMP_HPP_

#include "numpmp/common.hpp"
#include "numpmp/gen.hpp"
#include "numpmp/io.hpp"
#include "numpmp/model.hpp"
#include "numpmp/oracle.hpp"
#include "numpmp/prox.hpp"
#include "numpmp/solver.hpp"
#include "numpmp/stats.hpp"
#include "numpmp/transit.hpp"
#include "numpmp/warm.hpp"

#endif  // NUMPMP_NUMPMP_HPP_
