#pragma once

#include "incomefp/empirics.hpp"
#include "incomefp/error.hpp"
#include "incomefp/estimate.hpp"
#include "incomefp/inequality.hpp"
#include "incomefp/io.hpp"
#include "incomefp/model.hpp"
#include "incomefp/optimize.hpp"
#include "incomefp/quadrature.hpp"
#include "incomefp/regression.hpp"
#include "incomefp/simulate.hpp"
