#pragma once

#include "tip/dataset.hpp"
#include "tip/equilibrium.hpp"
#include "tip/evaluation.hpp"
#include "tip/inference.hpp"
#include "tip/random.hpp"
#include "tip/simulator.hpp"
#include "tip/special_functions.hpp"
#include "tip/synthetic.hpp"
#include "tip/trust_core.hpp"
