#pragma once

#include "gwcls/cls.hpp"
#include "gwcls/config.hpp"
#include "gwcls/error.hpp"
#include "gwcls/harness.hpp"
#include "gwcls/law.hpp"
#include "gwcls/limits.hpp"
#include "gwcls/linalg.hpp"
#include "gwcls/model.hpp"
#include "gwcls/moments.hpp"
#include "gwcls/rng.hpp"
#include "gwcls/simulate.hpp"
#include "gwcls/stats.hpp"
