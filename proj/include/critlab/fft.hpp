#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "critlab/grid.hpp"

namespace critlab::fft {

using complex = std::complex<double>;

namespace detail {

// The FFTW planner is not re-entrant; execution of an existing plan on new
// arrays is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard lock(planner_mutex());
        auto key = std::make_tuple(dim, n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        int dims[3] = {n, n, n};
        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        std::vector<complex> in(total), out(total);
        fftw_plan p = fftw_plan_dft(dim, dims, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

}  // namespace detail

/// Unnormalized forward transform (e^{-i k x}) of one component.
inline void forward(const Grid& g, const complex* in, complex* out) {
    fftw_plan p = detail::plan_cache().get(g.dim(), g.n(), FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

/// Unnormalized backward transform (e^{+i k x}) of one component.
inline void backward(const Grid& g, const complex* in, complex* out) {
    fftw_plan p = detail::plan_cache().get(g.dim(), g.n(), FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace critlab::fft
