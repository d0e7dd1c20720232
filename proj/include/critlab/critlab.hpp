#pragma once

// Umbrella header.
#include "critlab/grid.hpp"
#include "critlab/spectral_field.hpp"
#include "critlab/operators.hpp"
#include "critlab/random_fields.hpp"
#include "critlab/littlewood_paley.hpp"
#include "critlab/besov.hpp"
#include "critlab/model.hpp"
#include "critlab/flow_models.hpp"
#include "critlab/time_integration.hpp"
#include "critlab/experiments.hpp"
#include "critlab/io.hpp"
