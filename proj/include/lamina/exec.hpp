#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamina {

// Execution mode for node loops. Results must be identical in both modes:
// kernels write only to their own node slot and all reductions run serially
// afterwards in fixed node order.
enum class Exec { serial, parallel };

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <class F>
void for_each_node(std::size_t count, Exec mode, F&& body) {
#ifdef _OPENMP
    if (mode == Exec::parallel) {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(count); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)mode;
#endif
    for (std::size_t i = 0; i < count; ++i) body(i);
}

} // namespace lamina
