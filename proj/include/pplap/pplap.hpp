#pragma once

#include "pplap/calculus.hpp"
#include "pplap/error.hpp"
#include "pplap/families.hpp"
#include "pplap/graph.hpp"
#include "pplap/harness.hpp"
#include "pplap/inequality_sampling.hpp"
#include "pplap/knr.hpp"
#include "pplap/model.hpp"
#include "pplap/solver.hpp"
#include "pplap/vectorineq.hpp"
