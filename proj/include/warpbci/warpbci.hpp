#pragma once

#include "warpbci/artifact_class.hpp"
#include "warpbci/classify.hpp"
#include "warpbci/detect.hpp"
#include "warpbci/error.hpp"
#include "warpbci/iir.hpp"
#include "warpbci/lexicon.hpp"
#include "warpbci/online.hpp"
#include "warpbci/parallel.hpp"
#include "warpbci/session.hpp"
#include "warpbci/signal.hpp"
#include "warpbci/speller.hpp"
#include "warpbci/synth.hpp"
#include "warpbci/template_bank.hpp"
#include "warpbci/trial_io.hpp"
#include "warpbci/warp.hpp"
