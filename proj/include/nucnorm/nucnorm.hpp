#pragma once

#include "core.hpp"
#include "spectral.hpp"
#include "projection.hpp"
#include "graph.hpp"
#include "normal_cones.hpp"
#include "limiting.hpp"
#include "sequence.hpp"
#include "coderivative.hpp"
#include "generators.hpp"
