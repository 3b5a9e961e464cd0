#pragma once

#include "hierle/tree.hpp"
#include "hierle/dissimilarity.hpp"
#include "hierle/embedding.hpp"
#include "hierle/dataset.hpp"
#include "hierle/classifier.hpp"
#include "hierle/model_io.hpp"
#include "hierle/metrics.hpp"
#include "hierle/datagen.hpp"
#include "hierle/experiment.hpp"
