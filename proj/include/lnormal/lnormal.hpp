#pragma once

#include "lnormal/analyzer.hpp"
#include "lnormal/config.hpp"
#include "lnormal/dump.hpp"
#include "lnormal/genseq.hpp"
#include "lnormal/gls.hpp"
#include "lnormal/ltree.hpp"
#include "lnormal/multigls.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"
#include "lnormal/scheduler.hpp"
