#include "pareidolia/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "pareidolia/types.hpp"

namespace pareidolia::fft {
namespace {

// One forward + one backward plan per grid size, created with
// FFTW_ESTIMATE | FFTW_UNALIGNED on scratch buffers and reused through
// fftw_execute_dft.  ESTIMATE keeps plan selection deterministic and
// UNALIGNED lets the plans run on ordinary vector storage.  The FFTW
// planner is not thread-safe, hence the mutex; execution is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

struct PlanCache {
  std::map<int, PlanPair> plans;

  ~PlanCache() {
    for (auto& [n, pair] : plans) {
      if (pair.forward) fftw_destroy_plan(pair.forward);
      if (pair.backward) fftw_destroy_plan(pair.backward);
    }
    fftw_cleanup();
  }
};

std::mutex g_planner_mutex;
std::map<int, PlanPair>& plan_cache() {
  static PlanCache cache;
  return cache.plans;
}

PlanPair get_plans(int n) {
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<std::complex<double>> scratch_in(static_cast<std::size_t>(n) * n);
  std::vector<std::complex<double>> scratch_out(scratch_in.size());
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());

  PlanPair plans;
  plans.forward =
      fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.backward =
      fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans.forward || !plans.backward) {
    throw data_error("fft: plan creation failed for size " + std::to_string(n));
  }
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

void dft2(int n, const std::complex<double>* in, std::complex<double>* out,
          bool inverse) {
  if (n < 1) throw parameter_error("fft: grid size must be positive");
  const PlanPair plans = get_plans(n);
  // fftw_execute_dft does not modify the input array for out-of-place plans.
  auto* fin = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in));
  auto* fout = reinterpret_cast<fftw_complex*>(out);
  fftw_execute_dft(inverse ? plans.backward : plans.forward, fin, fout);
  if (inverse) {
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    const std::size_t total = static_cast<std::size_t>(n) * n;
    for (std::size_t i = 0; i < total; ++i) out[i] *= scale;
  }
}

std::vector<std::complex<double>> forward_real(int n, const double* pixels) {
  const std::size_t total = static_cast<std::size_t>(n) * n;
  std::vector<std::complex<double>> in(total);
  for (std::size_t i = 0; i < total; ++i) in[i] = pixels[i];
  std::vector<std::complex<double>> out(total);
  dft2(n, in.data(), out.data(), false);
  return out;
}

}  // namespace pareidolia::fft
