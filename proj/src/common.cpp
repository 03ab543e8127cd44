#include "provgraph/common.hpp"

#include <cstdlib>
#include <thread>

namespace provgraph {

unsigned worker_count() {
    if (const char* env = std::getenv("PROVGRAPH_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace provgraph
