#include "detail/fft.hpp"

#include <fftw3.h>

#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>

#include "wienerlab/errors.hpp"

namespace wienerlab::detail {
namespace {

using Key = std::tuple<int, int, int, int, int>;  // kind, dim/n, n/howmany, sign

struct PlanCache {
    std::mutex mutex;
    std::map<Key, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    fftw_plan get(const Key& key, auto&& make) {
        std::lock_guard lock(mutex);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        fftw_plan plan = make();
        if (plan == nullptr) throw NumericalFault("fftw: plan creation failed");
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

int sign_of(Direction dir) { return dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

fftw_complex* as_fftw(std::span<Complex> data) { return reinterpret_cast<fftw_complex*>(data.data()); }

bool aligned(const void* p) { return (reinterpret_cast<std::uintptr_t>(p) & 63u) == 0; }

}  // namespace

void dft_cube(int dim, int n, Direction dir, std::span<Complex> data) {
    const int sign = sign_of(dir);
    // Aligned buffers share one plan; anything else gets an unaligned plan.
    const int align_flag = aligned(data.data()) ? 0 : 1;
    fftw_plan plan = cache().get(Key{0, dim, n, sign, align_flag}, [&] {
        int dims[4] = {n, n, n, n};
        ComplexBuffer scratch(data.size());
        unsigned flags = FFTW_ESTIMATE | (align_flag ? FFTW_UNALIGNED : 0u);
        return fftw_plan_dft(dim, dims, as_fftw(scratch), as_fftw(scratch), sign, flags);
    });
    fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void dft_strided(int n, int howmany, Direction dir, std::span<Complex> data) {
    const int sign = sign_of(dir);
    const int align_flag = aligned(data.data()) ? 0 : 1;
    fftw_plan plan = cache().get(Key{1, n, howmany, sign, align_flag}, [&] {
        ComplexBuffer scratch(data.size());
        unsigned flags = FFTW_ESTIMATE | (align_flag ? FFTW_UNALIGNED : 0u);
        int len[1] = {n};
        return fftw_plan_many_dft(1, len, howmany, as_fftw(scratch), nullptr, howmany, 1,
                                  as_fftw(scratch), nullptr, howmany, 1, sign, flags);
    });
    fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

}  // namespace wienerlab::detail
