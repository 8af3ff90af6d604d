#pragma once

#include "slar/abstraction.hpp"
#include "slar/error.hpp"
#include "slar/io.hpp"
#include "slar/log_model.hpp"
#include "slar/markov.hpp"
#include "slar/property.hpp"
#include "slar/psa.hpp"
#include "slar/pst.hpp"
#include "slar/slar.hpp"
#include "slar/svm.hpp"
#include "slar/synthetic.hpp"
#include "slar/validation.hpp"
