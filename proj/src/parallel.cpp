#include "rsodc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace rsodc {

unsigned default_thread_count()
{
    if (const char* env = std::getenv("RSODC_THREADS")) {
        try {
            const int value = std::stoi(env);
            if (value >= 1) return static_cast<unsigned>(value);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace rsodc
