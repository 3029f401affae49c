#pragma once

#include "dcg/analytics.hpp"
#include "dcg/catalan.hpp"
#include "dcg/dynamics.hpp"
#include "dcg/errors.hpp"
#include "dcg/markov.hpp"
#include "dcg/params.hpp"
#include "dcg/riccati.hpp"
#include "dcg/verify.hpp"
