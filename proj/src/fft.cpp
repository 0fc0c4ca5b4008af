#include "otfs/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace otfs::fft {
namespace {

// Plans are created once per shape under a lock and executed through the
// new-array interface, which FFTW documents as thread-safe.
class PlanCache {
public:
    fftw_plan get(std::size_t howmany, std::size_t n, int sign)
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(howmany, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end())
            return it->second;

        auto* a = fftw_alloc_complex(howmany * n);
        auto* b = fftw_alloc_complex(howmany * n);
        int len = static_cast<int>(n);
        int stride = static_cast<int>(howmany);
        fftw_plan p = fftw_plan_many_dft(1, &len, static_cast<int>(howmany), a, nullptr, stride, 1, b,
                                         nullptr, stride, 1, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache()
    {
        for (auto& kv : plans_)
            fftw_destroy_plan(kv.second);
    }

private:
    std::mutex mu_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

void execute(const cplx* in, cplx* out, std::size_t howmany, std::size_t n, int sign)
{
    if (n == 0 || howmany == 0)
        return;
    fftw_plan p = cache().get(howmany, n, sign);
    const std::size_t total = howmany * n;

    thread_local CVec scratch;
    const cplx* src = in;
    if (in == out) {
        scratch.assign(in, in + total);
        src = scratch.data();
    }
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(src)),
                     reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < total; ++i)
        out[i] *= s;
}

}  // namespace

void dft(const cplx* in, cplx* out, std::size_t n) { execute(in, out, 1, n, FFTW_FORWARD); }
void idft(const cplx* in, cplx* out, std::size_t n) { execute(in, out, 1, n, FFTW_BACKWARD); }

CVec dft(const CVec& x)
{
    CVec y(x.size());
    dft(x.data(), y.data(), x.size());
    return y;
}

CVec idft(const CVec& x)
{
    CVec y(x.size());
    idft(x.data(), y.data(), x.size());
    return y;
}

void dft_rows(const cplx* in, cplx* out, std::size_t howmany, std::size_t n)
{
    execute(in, out, howmany, n, FFTW_FORWARD);
}

void idft_rows(const cplx* in, cplx* out, std::size_t howmany, std::size_t n)
{
    execute(in, out, howmany, n, FFTW_BACKWARD);
}

}  // namespace otfs::fft
