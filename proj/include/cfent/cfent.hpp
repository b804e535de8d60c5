#ifndef CFENT_CFENT_HPP
#define CFENT_CFENT_HPP

#include "errors.hpp"
#include "matrix_exponential.hpp"
#include "params.hpp"
#include "dynamics.hpp"
#include "entanglement.hpp"
#include "experiments.hpp"

#endif
