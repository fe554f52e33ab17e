#pragma once

// Convenience umbrella for the whole toolkit.

#include "smt/align.hpp"
#include "smt/corpus.hpp"
#include "smt/decoder.hpp"
#include "smt/lexicon.hpp"
#include "smt/lm.hpp"
#include "smt/mert.hpp"
#include "smt/metrics.hpp"
#include "smt/phrase.hpp"
#include "smt/pipeline.hpp"
#include "smt/synth.hpp"
#include "smt/util.hpp"
