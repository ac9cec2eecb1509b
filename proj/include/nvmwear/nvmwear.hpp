#pragma once

#include "nvmwear/address_space.hpp"
#include "nvmwear/config.hpp"
#include "nvmwear/controller.hpp"
#include "nvmwear/endurance.hpp"
#include "nvmwear/mapping_cache.hpp"
#include "nvmwear/movement.hpp"
#include "nvmwear/mwsr.hpp"
#include "nvmwear/pcm_s.hpp"
#include "nvmwear/report_io.hpp"
#include "nvmwear/rng.hpp"
#include "nvmwear/sawl.hpp"
#include "nvmwear/security_refresh.hpp"
#include "nvmwear/segment_swap.hpp"
#include "nvmwear/simulator.hpp"
#include "nvmwear/start_gap.hpp"
#include "nvmwear/translation.hpp"
#include "nvmwear/wear_leveler.hpp"
#include "nvmwear/workloads.hpp"
