#pragma once

#include "pielm/activation.hpp"
#include "pielm/assembly.hpp"
#include "pielm/domain.hpp"
#include "pielm/experiment.hpp"
#include "pielm/feature_network.hpp"
#include "pielm/lstsq.hpp"
#include "pielm/mc_models.hpp"
#include "pielm/metrics.hpp"
#include "pielm/multi_index.hpp"
#include "pielm/parallel.hpp"
#include "pielm/pde_problem.hpp"
#include "pielm/rng.hpp"
#include "pielm/sampling.hpp"
