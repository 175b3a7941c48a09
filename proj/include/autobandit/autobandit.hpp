#pragma once

#include "core.hpp"
#include "dataset_env.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "meta_learner.hpp"
#include "policies.hpp"
#include "rng.hpp"
#include "synthetic_env.hpp"
