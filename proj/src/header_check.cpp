#include "pm/core.hpp"
#include "pm/index_space.hpp"
#include "pm/sequential.hpp"
#include "pm/cell_grid.hpp"
#include "pm/executor.hpp"
#include "pm/dist_runtime.hpp"
#include "pm/methods.hpp"
#include "pm/verify.hpp"
#include "pm/complexity.hpp"
#include "pm/io.hpp"
#include "pm/pm.hpp"
