#pragma once

#include "leadership/dataset.hpp"
#include "leadership/dtw.hpp"
#include "leadership/evaluate.hpp"
#include "leadership/forest.hpp"
#include "leadership/geometry.hpp"
#include "leadership/io.hpp"
#include "leadership/network.hpp"
#include "leadership/pagerank.hpp"
#include "leadership/pipeline.hpp"
#include "leadership/ranking.hpp"
#include "leadership/simulate.hpp"
