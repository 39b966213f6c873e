#include "deformlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace deformlab::fft {
namespace {

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) {
            return it->second;
        }
        // Planning with FFTW_ESTIMATE leaves the scratch arrays untouched and
        // is deterministic; FFTW_UNALIGNED lets us execute on any buffer.
        auto* a = fftw_alloc_complex(n);
        auto* b = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), a, b, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
        if (plan == nullptr) {
            throw std::runtime_error("fftw: failed to create plan");
        }
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

void execute(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
             int sign)
{
    if (in.size() != out.size()) {
        throw std::invalid_argument("fft: input and output sizes differ");
    }
    if (in.empty()) {
        return;
    }
    fftw_plan plan = cache().get(in.size(), sign);
    // FFTW does not modify the input of an out-of-place complex transform.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    if (in.data() == out.data()) {
        std::vector<std::complex<double>> copy(in.begin(), in.end());
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()), dst);
    } else {
        fftw_execute_dft(plan, src, dst);
    }
}

}  // namespace

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out)
{
    execute(in, out, FFTW_FORWARD);
}

void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out)
{
    execute(in, out, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& v : out) {
        v *= scale;
    }
}

std::vector<std::complex<double>> forward(std::span<const std::complex<double>> in)
{
    std::vector<std::complex<double>> out(in.size());
    forward(in, out);
    return out;
}

std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> in)
{
    std::vector<std::complex<double>> out(in.size());
    inverse(in, out);
    return out;
}

}  // namespace deformlab::fft
