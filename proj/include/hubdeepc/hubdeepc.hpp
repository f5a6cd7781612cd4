#pragma once

#include "hubdeepc/error.hpp"
#include "hubdeepc/random.hpp"
#include "hubdeepc/trajectory.hpp"
#include "hubdeepc/qp.hpp"
#include "hubdeepc/deepc.hpp"
#include "hubdeepc/building.hpp"
#include "hubdeepc/battery.hpp"
#include "hubdeepc/heat_pump.hpp"
#include "hubdeepc/profiles.hpp"
#include "hubdeepc/rbc.hpp"
#include "hubdeepc/hub_controller.hpp"
#include "hubdeepc/harness.hpp"
#include "hubdeepc/config_io.hpp"
