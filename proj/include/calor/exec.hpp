#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace calor {

// Execution policy for the data-parallel kernels. Every kernel has a serial
// reference path and an OpenMP path; both must produce bit-identical results.
enum class Exec { Serial, Parallel };

// Compensated (Kahan) accumulator.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// Deterministic chunked reduction: the index range is split into a fixed
// chunk grid that does not depend on the thread count, each chunk is summed
// with compensation, and the per-chunk partials are combined in chunk order.
// Hence Serial and Parallel (any thread count) agree bit for bit.
inline double reduce_indexed(std::size_t count,
                             const std::function<double(std::size_t)>& term,
                             Exec exec,
                             std::size_t chunk_grid = 256) {
    if (count == 0) return 0.0;
    if (chunk_grid == 0) chunk_grid = 1;
    std::size_t nchunk = chunk_grid < count ? chunk_grid : count;
    std::vector<double> partial(nchunk, 0.0);

    auto run_chunk = [&](std::size_t ci) {
        std::size_t lo = count * ci / nchunk;
        std::size_t hi = count * (ci + 1) / nchunk;
        KahanSum acc;
        for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
        partial[ci] = acc.value();
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long ci = 0; ci < (long long)nchunk; ++ci) run_chunk((std::size_t)ci);
    } else {
        for (std::size_t ci = 0; ci < nchunk; ++ci) run_chunk(ci);
    }

    KahanSum total;
    for (std::size_t ci = 0; ci < nchunk; ++ci) total.add(partial[ci]);
    return total.value();
}

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int t) {
#if defined(_OPENMP)
    if (t > 0) omp_set_num_threads(t);
#else
    (void)t;
#endif
}

} // namespace calor
