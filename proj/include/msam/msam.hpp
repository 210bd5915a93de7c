// msam/msam.hpp

// Copyright 2026  The msam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef MSAM_MSAM_HPP_
#define MSAM_MSAM_HPP_

#include "msam/analysis.hpp"
#include "msam/checkpoint.hpp"
#include "msam/conv.hpp"
#include "msam/dataio.hpp"
#include "msam/error.hpp"
#include "msam/fbank.hpp"
#include "msam/model.hpp"
#include "msam/model_spec.hpp"
#include "msam/multispan.hpp"
#include "msam/network.hpp"
#include "msam/run_config.hpp"
#include "msam/synth.hpp"
#include "msam/trainer.hpp"

#endif  // MSAM_MSAM_HPP_
