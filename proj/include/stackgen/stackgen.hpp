#pragma once

#include "stackgen/classifier.hpp"
#include "stackgen/config.hpp"
#include "stackgen/dataset.hpp"
#include "stackgen/ensemble.hpp"
#include "stackgen/error.hpp"
#include "stackgen/experiment.hpp"
#include "stackgen/hash.hpp"
#include "stackgen/knn.hpp"
#include "stackgen/linear_models.hpp"
#include "stackgen/matrix.hpp"
#include "stackgen/metrics.hpp"
#include "stackgen/mlp.hpp"
#include "stackgen/naive_bayes.hpp"
#include "stackgen/params.hpp"
#include "stackgen/preprocess.hpp"
#include "stackgen/registry.hpp"
#include "stackgen/report.hpp"
#include "stackgen/rng.hpp"
#include "stackgen/stacking.hpp"
#include "stackgen/svm.hpp"
#include "stackgen/tree.hpp"
#include "stackgen/version.hpp"
