/*
 * Copyright 2026 The adsorbxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ADSORBXAI_TOOLS_COMMANDS_H_
#define ADSORBXAI_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

#include "run_context.h"

namespace adsorbxai::cli {

struct Invocation {
  CommonOptions common;
  json resolved;
  std::vector<std::string> argv;
};

int RunExtract(const Invocation& inv);
int RunTrain(const Invocation& inv);
int RunExplain(const Invocation& inv);
int RunSr(const Invocation& inv);

}  // namespace adsorbxai::cli

#endif  // ADSORBXAI_TOOLS_COMMANDS_H_
