#pragma once

#include "dpbayes/error.hpp"
#include "dpbayes/random.hpp"
#include "dpbayes/graph.hpp"
#include "dpbayes/table.hpp"
#include "dpbayes/laplace.hpp"
#include "dpbayes/fourier.hpp"
#include "dpbayes/sampler.hpp"
#include "dpbayes/map.hpp"
#include "dpbayes/regress.hpp"
#include "dpbayes/metrics.hpp"
#include "dpbayes/verify.hpp"
#include "dpbayes/naive_bayes.hpp"
#include "dpbayes/io.hpp"
#include "dpbayes/experiment.hpp"
