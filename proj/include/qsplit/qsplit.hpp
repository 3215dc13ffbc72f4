#pragma once

#include "qsplit/core.hpp"
#include "qsplit/lattice.hpp"
#include "qsplit/fw.hpp"
#include "qsplit/splitter.hpp"
#include "qsplit/dynamics.hpp"
#include "qsplit/analysis.hpp"
#include "qsplit/disorder.hpp"
#include "qsplit/dimer.hpp"
#include "qsplit/io.hpp"
#include "qsplit/scenario.hpp"
