#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "isoembed/fields.hpp"

namespace isoembed {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Signed frequency of index j along a direction of length N; the Nyquist
// index of an even N is reported as +N/2.
int freq(int j, int N, bool last) {
  if (last) return j;
  return (j <= N / 2) ? j : j - N;
}
bool nyquist(int k, int N) { return N % 2 == 0 && std::abs(k) == N / 2; }

// Plans and derivative multipliers for one grid; shared by all fields on it.
struct Plan {
  std::vector<int> res;
  std::size_t real = 1, half = 1;
  fftw_plan fwd = nullptr, inv = nullptr;
  int n = 0, s = 0;
  // half * n first-derivative multipliers (imaginary), half * s second-derivative (real)
  std::vector<double> m1, m2;
  std::vector<std::vector<int>> kvec;  // signed frequency per half-spectrum index

  ~Plan() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }
};

std::mutex g_plan_mutex;

std::shared_ptr<const Plan> plan_for(const GridSpec& grid) {
  static std::map<std::pair<std::vector<int>, std::vector<double>>, std::shared_ptr<Plan>> cache;
  const Mat& binv = grid.lattice.inverse_basis();
  std::vector<double> key_b(binv.data(), binv.data() + binv.size());
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_pair(grid.res, key_b);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto p = std::make_shared<Plan>();
  const int n = grid.n();
  p->res = grid.res;
  p->n = n;
  p->s = sym_count(n);
  for (int a = 0; a < n; ++a) {
    p->real *= grid.res[a];
    p->half *= (a == n - 1) ? grid.res[a] / 2 + 1 : grid.res[a];
  }
  double* in = fftw_alloc_real(p->real);
  fftw_complex* out = fftw_alloc_complex(p->half);
  p->fwd = fftw_plan_dft_r2c(n, grid.res.data(), in, out, FFTW_ESTIMATE);
  p->inv = fftw_plan_dft_c2r(n, grid.res.data(), out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);

  p->kvec.resize(p->half);
  p->m1.assign(p->half * n, 0.0);
  p->m2.assign(p->half * p->s, 0.0);
  std::vector<int> j(n, 0);
  for (std::size_t h = 0; h < p->half; ++h) {
    std::vector<int> k(n);
    std::vector<bool> nyq(n);
    for (int a = 0; a < n; ++a) {
      k[a] = freq(j[a], grid.res[a], a == n - 1);
      nyq[a] = nyquist(k[a], grid.res[a]);
    }
    p->kvec[h] = k;
    for (int i = 0; i < n; ++i) {
      double kap = 0;
      for (int a = 0; a < n; ++a)
        if (!nyq[a]) kap += binv(a, i) * k[a];
      p->m1[h * n + i] = kTwoPi * kap;
    }
    for (int i = 0; i < n; ++i)
      for (int jj = i; jj < n; ++jj) {
        double acc = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double mab;
            if (a == b)
              mab = static_cast<double>(k[a]) * k[a];
            else if (nyq[a] || nyq[b])
              mab = 0;
            else
              mab = static_cast<double>(k[a]) * k[b];
            acc += binv(a, i) * binv(b, jj) * mab;
          }
        p->m2[h * p->s + sym_index(i, jj, n)] = -kTwoPi * kTwoPi * acc;
      }
    // advance the half-spectrum multi-index, last direction fastest
    for (int a = n - 1; a >= 0; --a) {
      int lim = (a == n - 1) ? grid.res[a] / 2 + 1 : grid.res[a];
      if (++j[a] < lim) break;
      j[a] = 0;
    }
  }
  cache[key] = p;
  return p;
}

struct Buffers {
  double* r;
  fftw_complex* c;
  fftw_complex* t;
  explicit Buffers(const Plan& p)
      : r(fftw_alloc_real(p.real)), c(fftw_alloc_complex(p.half)), t(fftw_alloc_complex(p.half)) {}
  ~Buffers() {
    fftw_free(r);
    fftw_free(c);
    fftw_free(t);
  }
  Buffers(const Buffers&) = delete;
  Buffers& operator=(const Buffers&) = delete;
};

PeriodicField spectral_derivative(const PeriodicField& f, int order) {
  auto plan = plan_for(f.grid);
  const int n = plan->n;
  const int per = order == 1 ? n : plan->s;
  PeriodicField out(f.grid, Rank::vector, f.comps * per);
  const std::size_t P = plan->real, H = plan->half;
  const double scale = 1.0 / static_cast<double>(P);
#pragma omp parallel
  {
    Buffers b(*plan);
#pragma omp for schedule(static)
    for (int c = 0; c < f.comps; ++c) {
      std::copy(f.comp(c), f.comp(c) + P, b.r);
      fftw_execute_dft_r2c(plan->fwd, b.r, b.c);
      for (int d = 0; d < per; ++d) {
        if (order == 1) {
          for (std::size_t h = 0; h < H; ++h) {
            double m = plan->m1[h * n + d];
            b.t[h][0] = -m * b.c[h][1];
            b.t[h][1] = m * b.c[h][0];
          }
        } else {
          for (std::size_t h = 0; h < H; ++h) {
            double m = plan->m2[h * per + d];
            b.t[h][0] = m * b.c[h][0];
            b.t[h][1] = m * b.c[h][1];
          }
        }
        fftw_execute_dft_c2r(plan->inv, b.t, b.r);
        double* dst = out.comp(c * per + d);
        for (std::size_t p = 0; p < P; ++p) dst[p] = b.r[p] * scale;
      }
    }
  }
  return out;
}

// Fourth-order centred differences along lattice direction a, then the chain
// rule to physical coordinates.
PeriodicField fd_derivative(const PeriodicField& f, int order) {
  const GridSpec& g = f.grid;
  const int n = g.n();
  const Mat& binv = g.lattice.inverse_basis();
  const std::size_t P = g.size();
  std::vector<std::size_t> stride(n);
  {
    std::size_t s = 1;
    for (int a = n - 1; a >= 0; --a) {
      stride[a] = s;
      s *= g.res[a];
    }
  }
  auto shift = [&](std::size_t p, int a, int by) {
    int N = g.res[a];
    int i = static_cast<int>((p / stride[a]) % N);
    int ni = ((i + by) % N + N) % N;
    return p + (static_cast<std::ptrdiff_t>(ni) - i) * static_cast<std::ptrdiff_t>(stride[a]);
  };
  auto d1 = [&](const double* src, double* dst, int a) {
    double h = 1.0 / g.res[a];
    for (std::size_t p = 0; p < P; ++p)
      dst[p] = (-src[shift(p, a, 2)] + 8 * src[shift(p, a, 1)] - 8 * src[shift(p, a, -1)] +
                src[shift(p, a, -2)]) /
               (12 * h);
  };
  auto d2 = [&](const double* src, double* dst, int a) {
    double h = 1.0 / g.res[a];
    for (std::size_t p = 0; p < P; ++p)
      dst[p] = (-src[shift(p, a, 2)] + 16 * src[shift(p, a, 1)] - 30 * src[p] +
                16 * src[shift(p, a, -1)] - src[shift(p, a, -2)]) /
               (12 * h * h);
  };
  const int s = sym_count(n);
  const int per = order == 1 ? n : s;
  PeriodicField out(g, Rank::vector, f.comps * per);
  for (int c = 0; c < f.comps; ++c) {
    // derivatives in lattice coordinates
    std::vector<std::vector<double>> dt(n, std::vector<double>(P));
    for (int a = 0; a < n; ++a) d1(f.comp(c), dt[a].data(), a);
    if (order == 1) {
      for (int i = 0; i < n; ++i) {
        double* dst = out.comp(c * n + i);
        for (std::size_t p = 0; p < P; ++p) {
          double acc = 0;
          for (int a = 0; a < n; ++a) acc += binv(a, i) * dt[a][p];
          dst[p] = acc;
        }
      }
      continue;
    }
    std::vector<std::vector<double>> dtt(n * n, std::vector<double>(P));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b)
          d2(f.comp(c), dtt[a * n + b].data(), a);
        else
          d1(dt[a].data(), dtt[a * n + b].data(), b);
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double* dst = out.comp(c * s + sym_index(i, j, n));
        for (std::size_t p = 0; p < P; ++p) {
          double acc = 0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) acc += binv(a, i) * binv(b, j) * dtt[a * n + b][p];
          dst[p] = acc;
        }
      }
  }
  return out;
}

}  // namespace

PeriodicField derivative(const PeriodicField& f, int order, Method method) {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  return method == Method::spectral ? spectral_derivative(f, order) : fd_derivative(f, order);
}

void low_pass(PeriodicField& f, double cut) {
  auto plan = plan_for(f.grid);
  const std::size_t P = plan->real, H = plan->half;
  std::vector<char> keep(H);
  for (std::size_t h = 0; h < H; ++h) {
    bool k = true;
    for (int a = 0; a < plan->n; ++a)
      if (std::abs(plan->kvec[h][a]) > cut * f.grid.res[a] / 2.0) k = false;
    keep[h] = k;
  }
#pragma omp parallel
  {
    Buffers b(*plan);
#pragma omp for schedule(static)
    for (int c = 0; c < f.comps; ++c) {
      std::copy(f.comp(c), f.comp(c) + P, b.r);
      fftw_execute_dft_r2c(plan->fwd, b.r, b.c);
      for (std::size_t h = 0; h < H; ++h)
        if (!keep[h]) b.c[h][0] = b.c[h][1] = 0;
      fftw_execute_dft_c2r(plan->inv, b.c, b.r);
      for (std::size_t p = 0; p < P; ++p) f.comp(c)[p] = b.r[p] / static_cast<double>(P);
    }
  }
}

Interpolant::Interpolant(const PeriodicField& f) : grid_(f.grid), comps_(f.comps) {
  auto plan = plan_for(f.grid);
  half_ = plan->half;
  spec_.resize(half_ * comps_);
  Buffers b(*plan);
  for (int c = 0; c < comps_; ++c) {
    std::copy(f.comp(c), f.comp(c) + plan->real, b.r);
    fftw_execute_dft_r2c(plan->fwd, b.r, b.c);
    for (std::size_t h = 0; h < half_; ++h)
      spec_[c * half_ + h] = {b.c[h][0] / plan->real, b.c[h][1] / plan->real};
  }
}

Vec Interpolant::operator()(const Vec& x) const {
  const int n = grid_.n();
  Vec t = grid_.lattice.to_lattice(x);
  for (int a = 0; a < n; ++a) t(a) -= std::floor(t(a));
  std::vector<std::vector<std::complex<double>>> fac(n);
  for (int a = 0; a < n; ++a) {
    int N = grid_.res[a];
    bool last = a == n - 1;
    int lim = last ? N / 2 + 1 : N;
    fac[a].resize(lim);
    for (int j = 0; j < lim; ++j) {
      int k = freq(j, N, last);
      double ang = kTwoPi * k * t(a);
      fac[a][j] = nyquist(k, N) ? std::complex<double>(std::cos(ang), 0.0)
                                : std::complex<double>(std::cos(ang), std::sin(ang));
    }
  }
  Vec out = Vec::Zero(comps_);
  const int Nl = grid_.res[n - 1];
  const int liml = Nl / 2 + 1;
  std::vector<int> j(n, 0);
  for (std::size_t h = 0; h < half_; h += liml) {
    std::complex<double> pre(1.0, 0.0);
    for (int a = 0; a < n - 1; ++a) pre *= fac[a][j[a]];
    for (int jl = 0; jl < liml; ++jl) {
      std::complex<double> e = pre * fac[n - 1][jl];
      double w = (jl == 0 || (Nl % 2 == 0 && jl == Nl / 2)) ? 1.0 : 2.0;
      for (int c = 0; c < comps_; ++c) out(c) += w * (spec_[c * half_ + h + jl] * e).real();
    }
    for (int a = n - 2; a >= 0; --a) {
      if (++j[a] < grid_.res[a]) break;
      j[a] = 0;
    }
  }
  return out;
}

}  // namespace isoembed
