#include "lru/dataset.hpp"

namespace lru {

Index Dataset::total_steps() const {
    Index total = 0;
    for (const auto& s : sessions) total += s.length();
    return total;
}

}  // namespace lru
