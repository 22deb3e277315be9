#include "oscamp/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace oscamp {

namespace {

struct Plans {
  fftw_plan fwd, bwd;
};

// Planning is not thread safe in FFTW; execution with new-array calls is.
std::mutex plan_mutex;

const Plans& plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CVec tmp(n);
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  Plans pl{fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED),
           fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED)};
  return cache.emplace(n, pl).first->second;
}

}  // namespace

void fft(CVec& data) {
  if (data.size() == 0) return;
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_for(static_cast<int>(data.size())).fwd, p, p);
}

void ifft(CVec& data) {
  if (data.size() == 0) return;
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_for(static_cast<int>(data.size())).bwd, p, p);
  data /= static_cast<double>(data.size());
}

CVec fft_of(const CVec& data) {
  CVec out = data;
  fft(out);
  return out;
}

CVec ifft_of(const CVec& data) {
  CVec out = data;
  ifft(out);
  return out;
}

Vec wavenumbers(int n, double L, bool zero_nyquist) {
  Vec k(n);
  for (int j = 0; j < n; ++j) {
    int m = j <= n / 2 ? j : j - n;
    if (zero_nyquist && n % 2 == 0 && j == n / 2) m = 0;
    k(j) = 2 * pi * m / L;
  }
  return k;
}

CVec spectral_shift(const CVec& f, double shift, double L) {
  const int n = static_cast<int>(f.size());
  CVec h = fft_of(f);
  Vec k = wavenumbers(n, L, false);
  for (int j = 0; j < n; ++j) {
    if (n % 2 == 0 && j == n / 2) h(j) *= std::cos(k(j) * shift);
    else h(j) *= std::exp(cd(0, k(j) * shift));
  }
  ifft(h);
  return h;
}

CVec spectral_derivative(const CVec& f, double L, int order) {
  const int n = static_cast<int>(f.size());
  CVec h = fft_of(f);
  Vec k = wavenumbers(n, L, order % 2 == 1);
  for (int j = 0; j < n; ++j) h(j) *= std::pow(cd(0, k(j)), order);
  ifft(h);
  return h;
}

CVec spectral_resample(const CVec& f, double L, const Vec& x) {
  const int n = static_cast<int>(f.size());
  CVec h = fft_of(f) / static_cast<double>(n);
  Vec k = wavenumbers(n, L, false);
  CVec out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    cd s = 0;
    for (int j = 0; j < n; ++j) {
      if (n % 2 == 0 && j == n / 2) s += h(j) * std::cos(k(j) * x(i));
      else s += h(j) * std::exp(cd(0, k(j) * x(i)));
    }
    out(i) = s;
  }
  return out;
}

CVec spectral_upsample(const CVec& f, int n_out) {
  const int n = static_cast<int>(f.size());
  if (n_out == n) return f;
  if (n_out < n) fail(Status::invalid_argument, "spectral_upsample needs n_out >= n");
  const CVec h = fft_of(f);
  CVec g = CVec::Zero(n_out);
  const int half = n / 2;
  for (int j = 0; j < n; ++j) {
    const int k = j <= half ? j : j - n;
    if (n % 2 == 0 && j == half) {
      // split the Nyquist coefficient symmetrically
      g(half) += 0.5 * h(j);
      g(n_out - half) += 0.5 * h(j);
    } else {
      g(k >= 0 ? k : n_out + k) += h(j);
    }
  }
  g *= static_cast<double>(n_out) / n;
  ifft(g);
  return g;
}

}  // namespace oscamp
