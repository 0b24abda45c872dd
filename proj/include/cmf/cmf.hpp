#pragma once

#include "cmf/dataset.hpp"
#include "cmf/experiment.hpp"
#include "cmf/factor.hpp"
#include "cmf/graph.hpp"
#include "cmf/linalg.hpp"
#include "cmf/matrix_io.hpp"
#include "cmf/model_io.hpp"
#include "cmf/pgm.hpp"
#include "cmf/recognition.hpp"
#include "cmf/rng.hpp"
#include "cmf/transform.hpp"
