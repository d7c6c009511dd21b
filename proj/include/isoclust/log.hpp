/*******************************************************************************
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
 *******************************************************************************/
#pragma once

#include <string>

namespace isoclust::log {

enum class Level { debug = 0, info = 1, warn = 2, quiet = 3 };

void set_level(Level level);
Level level();

// Messages go to stderr; artifacts never contain log output, so runs stay
// byte-reproducible regardless of verbosity.
void debug(const std::string& msg);
void info(const std::string& msg);
void warn(const std::string& msg);

/// Number of warnings emitted since process start (used by tests).
std::size_t warning_count();

}  // namespace isoclust::log
