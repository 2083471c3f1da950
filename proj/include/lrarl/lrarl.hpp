#pragma once

// Everything in one include.

#include <lrarl/adaptive.hpp>
#include <lrarl/adversary.hpp>
#include <lrarl/config.hpp>
#include <lrarl/core.hpp>
#include <lrarl/cover.hpp>
#include <lrarl/design.hpp>
#include <lrarl/estimator.hpp>
#include <lrarl/experiment.hpp>
#include <lrarl/fullinfo.hpp>
#include <lrarl/harness.hpp>
#include <lrarl/learner_common.hpp>
#include <lrarl/linalg.hpp>
#include <lrarl/mdp.hpp>
#include <lrarl/model_based.hpp>
#include <lrarl/oracle_efficient.hpp>
#include <lrarl/params.hpp>
#include <lrarl/regression.hpp>
#include <lrarl/replearn.hpp>
#include <lrarl/run_record.hpp>
#include <lrarl/serialize.hpp>
#include <lrarl/spanner.hpp>
#include <lrarl/transition.hpp>
#include <lrarl/verify.hpp>
