#pragma once

#include "dsbgs/linalg.hpp"
#include "dsbgs/random.hpp"
#include "dsbgs/partition.hpp"
#include "dsbgs/solver.hpp"
#include "dsbgs/theory.hpp"
#include "dsbgs/probgen.hpp"
#include "dsbgs/experiment.hpp"
#include "dsbgs/io.hpp"
#include "dsbgs/bench.hpp"
