#pragma once

#include "pbrs/abstraction.hpp"
#include "pbrs/common.hpp"
#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/envs/freeway.hpp"
#include "pbrs/envs/qbert.hpp"
#include "pbrs/envs/venture.hpp"
#include "pbrs/evaluation.hpp"
#include "pbrs/experiments.hpp"
#include "pbrs/learners.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/ordering.hpp"
#include "pbrs/policy_gradient.hpp"
#include "pbrs/ram.hpp"
#include "pbrs/reachability.hpp"
#include "pbrs/shaping.hpp"
#include "pbrs/value_iteration.hpp"
