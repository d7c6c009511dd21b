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
#include "isoclust/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace isoclust::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void debug(const std::string& msg) {
  if (g_level.load() <= Level::debug) emit("debug", msg);
}

void info(const std::string& msg) {
  if (g_level.load() <= Level::info) emit("info", msg);
}

void warn(const std::string& msg) {
  g_warnings.fetch_add(1);
  if (g_level.load() <= Level::warn) emit("warn", msg);
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace isoclust::log
