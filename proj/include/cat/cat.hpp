#pragma once

#include "cat/attribution.hpp"
#include "cat/config.hpp"
#include "cat/dataset.hpp"
#include "cat/error.hpp"
#include "cat/eval.hpp"
#include "cat/explanation.hpp"
#include "cat/models.hpp"
#include "cat/objective.hpp"
#include "cat/pipeline.hpp"
#include "cat/reference/attribute_bank.hpp"
#include "cat/reference/embedder.hpp"
#include "cat/reference/embedding_bag.hpp"
#include "cat/reference/ngram.hpp"
#include "cat/reference/simple.hpp"
#include "cat/search.hpp"
#include "cat/text.hpp"
