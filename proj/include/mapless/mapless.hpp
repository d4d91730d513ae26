#ifndef MAPLESS_MAPLESS_HPP
#define MAPLESS_MAPLESS_HPP

#include "agent_ground.hpp"
#include "baseline_planner.hpp"
#include "compare.hpp"
#include "curriculum.hpp"
#include "errors.hpp"
#include "explorer.hpp"
#include "geometry.hpp"
#include "goal_seeking_params.hpp"
#include "gradcheck.hpp"
#include "grid_mdp.hpp"
#include "local_goal.hpp"
#include "parallel.hpp"
#include "policy_net.hpp"
#include "reports.hpp"
#include "weights_io.hpp"
#include "world_sim.hpp"

#endif  // MAPLESS_MAPLESS_HPP
