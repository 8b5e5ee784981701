// Copyright 2026 The docfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "docfuzz/campaign.hpp"
#include "docfuzz/constraints.hpp"
#include "docfuzz/doc_parser.hpp"
#include "docfuzz/enrichment.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/generation.hpp"
#include "docfuzz/keywords.hpp"
#include "docfuzz/log.hpp"
#include "docfuzz/oracle.hpp"
#include "docfuzz/report.hpp"
#include "docfuzz/rng.hpp"
#include "docfuzz/schema.hpp"
#include "docfuzz/value.hpp"
#include "docfuzz/worker.hpp"
