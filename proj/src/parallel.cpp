#include "liftkit/parallel.hpp"

#include <cstdlib>
#include <omp.h>

namespace liftkit {

int thread_cap() {
    static const int cap = [] {
        int n = omp_get_max_threads();
        if (const char* env = std::getenv("LIFTKIT_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1 && v < n) n = v;
        }
        return n;
    }();
    return cap;
}

} // namespace liftkit
