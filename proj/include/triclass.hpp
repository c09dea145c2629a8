#pragma once

#include "triclass/corpus.hpp"
#include "triclass/delimited.hpp"
#include "triclass/eval.hpp"
#include "triclass/experiment.hpp"
#include "triclass/features.hpp"
#include "triclass/knn.hpp"
#include "triclass/labels.hpp"
#include "triclass/learners/learner.hpp"
#include "triclass/matrix.hpp"
#include "triclass/parallel.hpp"
#include "triclass/random.hpp"
#include "triclass/stacking.hpp"
#include "triclass/synthetic.hpp"
#include "triclass/text.hpp"
#include "triclass/unicode.hpp"
#include "triclass/vsm.hpp"
