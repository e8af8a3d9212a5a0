// Copyright 2026 The owrlab authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "owrlab/benchmark.hpp"
#include "owrlab/config.hpp"
#include "owrlab/dataset.hpp"
#include "owrlab/dg/plugin.hpp"
#include "owrlab/domains.hpp"
#include "owrlab/eval/driver.hpp"
#include "owrlab/eval/metrics.hpp"
#include "owrlab/eval/report.hpp"
#include "owrlab/eval/runner.hpp"
#include "owrlab/eval/validate.hpp"
#include "owrlab/mlp.hpp"
#include "owrlab/owr/checkpoint.hpp"
#include "owrlab/owr/classify.hpp"
#include "owrlab/owr/losses.hpp"
#include "owrlab/owr/model.hpp"
#include "owrlab/owr/train.hpp"
#include "owrlab/schedule.hpp"
#include "owrlab/tensor.hpp"
