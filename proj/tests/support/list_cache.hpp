/*
 *    Copyright 2026 The wpsim Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WPSIM_TESTS_LIST_CACHE_HPP
#define WPSIM_TESTS_LIST_CACHE_HPP

#include <cstdint>
#include <list>
#include <vector>

namespace wpsim::test {

// Brute-force reference model of an LRU set-associative cache: one list per
// set, most-recently-used line at the front, installs evict from the back.
// Deliberately structured nothing like the production arrays so the two can
// cross-check each other.
class ListCache
{
public:
  struct Event {
    bool hit = false;
    bool evicted = false;
    uint64_t evicted_line = 0;
  };

  ListCache(size_t sets, size_t ways, ListCache* next = nullptr) : sets_(sets), ways_(ways), next_(next) {}

  // addr is a byte address; lines are 64 bytes.
  Event access(uint64_t addr)
  {
    Event ev;
    uint64_t line = addr / 64;
    auto& set = set_for(line);
    for (auto it = set.begin(); it != set.end(); ++it) {
      if (*it == line) {
        set.erase(it);
        set.push_front(line);
        ev.hit = true;
        return ev;
      }
    }
    if (next_)
      next_->access(addr);
    if (set.size() == ways_) {
      ev.evicted = true;
      ev.evicted_line = set.back();
      set.pop_back();
    }
    set.push_front(line);
    return ev;
  }

private:
  std::list<uint64_t>& set_for(uint64_t line)
  {
    if (sets_by_index_.empty())
      sets_by_index_.resize(sets_);
    return sets_by_index_[line % sets_];
  }

  size_t sets_;
  size_t ways_;
  ListCache* next_;
  std::vector<std::list<uint64_t>> sets_by_index_;
};

} // namespace wpsim::test

#endif
