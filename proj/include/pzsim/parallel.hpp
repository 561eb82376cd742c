#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pzsim {

// Execution policy for the data-parallel kernels (sweep grids, transient
// batches). Every kernel has a plain serial loop next to the OpenMP one;
// the serial path is the reference the parallel path is tested against.
// Results are written by index, so both paths are bit-identical.
enum class Exec {
    serial,
    parallel,
};

// Runs body(i) for i in [0, n). Bodies must be independent and write only
// to their own index.
template <typename Body>
void parallel_for(std::ptrdiff_t n, Exec exec, const Body& body)
{
#if defined(_OPENMP)
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            body(i);
        return;
    }
#else
    (void)exec;
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i)
        body(i);
}

inline int max_threads()
{
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace pzsim
