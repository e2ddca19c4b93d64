#pragma once

#include "padam/errors.hpp"
#include "padam/harness.hpp"
#include "padam/nn.hpp"
#include "padam/objective.hpp"
#include "padam/optim.hpp"
#include "padam/problems.hpp"
#include "padam/rng.hpp"
