// Copyright 2026 The maskdet Authors. All Rights Reserved.
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

#include "maskdet/anchors.hpp"
#include "maskdet/annotations.hpp"
#include "maskdet/boxes.hpp"
#include "maskdet/config.hpp"
#include "maskdet/errors.hpp"
#include "maskdet/eval.hpp"
#include "maskdet/image.hpp"
#include "maskdet/kernels.hpp"
#include "maskdet/loss.hpp"
#include "maskdet/model.hpp"
#include "maskdet/postproc.hpp"
#include "maskdet/tensor.hpp"
#include "maskdet/weights.hpp"
