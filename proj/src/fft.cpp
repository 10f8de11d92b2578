#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "semilab/grid.hpp"

namespace semilab {

namespace {

// FFTW planning is not thread-safe and FFTW_MEASURE is not reproducible, so
// plans are created once per shape with FFTW_ESTIMATE|FFTW_UNALIGNED (valid
// for any buffer) and executed through the new-array interface.
struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, int, int>, fftw_plan> plans;  // (n0, n1, sign)

    // Plans are created out-of-place because every call site transforms into
    // a distinct output buffer; executing an in-place plan out-of-place is
    // undefined in FFTW.
    fftw_plan get(int n0, int n1, int sign) {
        std::scoped_lock lock(mu);
        auto key = std::make_tuple(n0, n1, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        std::size_t total = static_cast<std::size_t>(n0) * (n1 > 0 ? n1 : 1);
        fftw_complex* in = fftw_alloc_complex(total);
        fftw_complex* out = fftw_alloc_complex(total);
        fftw_plan p = n1 > 0
            ? fftw_plan_dft_2d(n0, n1, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
            : fftw_plan_dft_1d(n0, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(out);
        fftw_free(in);
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void dft(const Grid& g, const cplx* in, cplx* out, int sign) {
    fftw_plan p = cache().get(g.n[0], g.dim == 2 ? g.n[1] : 0, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void dft_1d(int n, const cplx* in, cplx* out, int sign) {
    fftw_plan p = cache().get(n, 0, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace semilab
