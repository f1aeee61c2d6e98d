#include "heis/oscillator.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "heis/wedge.hpp"

namespace heis {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr int kMaxOrder = 12;

// d^b/du^b exp(-2pi u^2) = P_b(u) exp(-2pi u^2); P_{b+1} = P_b' - 4pi u P_b
const std::vector<std::vector<double>>& hermite_coeffs() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t;
    t.push_back({1.0});
    for (int b = 0; b < kMaxOrder; ++b) {
      const auto& p = t.back();
      std::vector<double> q(p.size() + 1, 0.0);
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (k >= 1) q[k - 1] += p[k] * double(k);  // derivative
        q[k + 1] -= 4.0 * M_PI * p[k];             // -4pi u *
      }
      t.push_back(std::move(q));
    }
    return t;
  }();
  return table;
}

double poly_eval(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) s = s * u + c[k];
  return s;
}

}  // namespace

void AutomorphicMap::value(const Point& p, double* out) const {
  for (int c = 0; c < dim_f; ++c) out[c] = partial(c, p, 0, 0, 0);
}

double AutomorphicMap::partial(int comp, const Point& p, int a, int b, int c) const {
  if (a + b + c > kMaxOrder) throw std::invalid_argument("AutomorphicMap: derivative order cap");
  switch (comp) {
    case 0:  // cos 2pi x
      if (b || c) return 0.0;
      return std::pow(kTwoPi, a) * std::cos(kTwoPi * p.x + a * M_PI_2);
    case 1:
      if (b || c) return 0.0;
      return std::pow(kTwoPi, a) * std::sin(kTwoPi * p.x + a * M_PI_2);
    case 2:
      if (a || c) return 0.0;
      return std::pow(kTwoPi, b) * std::cos(kTwoPi * p.y + b * M_PI_2);
    case 3:
      if (a || c) return 0.0;
      return std::pow(kTwoPi, b) * std::sin(kTwoPi * p.y + b * M_PI_2);
    default: {
      // Re/Im of G_j, comp = 4 + 2j + (0:Re, 1:Im)
      int j = (comp - 4) / 2;
      bool imag = (comp - 4) % 2;
      long n0 = std::lround(-p.y);
      double re = 0.0, im = 0.0;
      const auto& herm = hermite_coeffs()[b];
      for (long n = n0 - theta_window; n <= n0 + theta_window; ++n) {
        double nu = double(n) + 0.5 * j;
        double u = p.y + nu;
        double amp = std::exp(-kTwoPi * u * u);
        if (amp == 0.0) continue;
        double mag = amp * poly_eval(herm, u) * std::pow(2.0 * kTwoPi * nu, a) *
                     std::pow(2.0 * kTwoPi, c);
        double phase = 2.0 * kTwoPi * (p.z + nu * p.x) + (a + c) * M_PI_2;
        re += mag * std::cos(phase);
        im += mag * std::sin(phase);
      }
      return theta_weight * (imag ? im : re);
    }
  }
}

AnalyticField AutomorphicMap::as_field() const {
  AnalyticField out;
  out.dim = dim_f;
  AutomorphicMap self = *this;
  out.value = [self](const Point& p, double* o) { self.value(p, o); };
  out.deriv = [self](const Point& p, const std::string& word, double* o) {
    auto terms = expand_word(word);
    for (int comp = 0; comp < self.dim_f; ++comp) {
      double s = 0.0;
      for (const auto& t : terms)
        s += t.coef * std::pow(p.y, t.ypow) * self.partial(comp, p, t.a, t.b, t.c);
      o[comp] = s;
    }
  };
  return out;
}

std::vector<OpTerm> expand_word(const std::string& word) {
  std::map<std::array<int, 4>, double> acc;  // (ypow,a,b,c) -> coef
  acc[{0, 0, 0, 0}] = 1.0;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    std::map<std::array<int, 4>, double> next;
    for (const auto& [key, coef] : acc) {
      auto [k, a, b, c] = key;
      switch (*it) {
        case 'X':
          next[{k, a + 1, b, c}] += coef;
          next[{k + 1, a, b, c + 1}] += coef;
          break;
        case 'Y':
          if (k >= 1) next[{k - 1, a, b, c}] += coef * k;
          next[{k, a, b + 1, c}] += coef;
          break;
        case 'Z':
          next[{k, a, b, c + 1}] += coef;
          break;
        default:
          throw std::invalid_argument("expand_word: ops are X, Y, Z");
      }
    }
    acc = std::move(next);
  }
  std::vector<OpTerm> out;
  out.reserve(acc.size());
  for (const auto& [key, coef] : acc) out.push_back({coef, key[0], key[1], key[2], key[3]});
  return out;
}

int veronese_dim(int mf) { return mf + mf * (mf + 1) / 2; }

void veronese(const double* v, int mf, double* out) {
  for (int i = 0; i < mf; ++i) out[i] = v[i];
  int k = mf;
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < mf; ++i)
    for (int j = i; j < mf; ++j) out[k++] = (i == j) ? v[i] * v[j] : r2 * v[i] * v[j];
}

namespace {

// per-point evaluator with memoised component partials
struct Phi0Eval {
  const AutomorphicMap& f;
  Point p;
  mutable std::map<std::array<int, 4>, double> cache;  // (comp,a,b,c)

  double part(int comp, int a, int b, int c) const {
    auto key = std::array<int, 4>{comp, a, b, c};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double v = f.partial(comp, p, a, b, c);
    cache.emplace(key, v);
    return v;
  }

  // partial of component product f_i f_j by the Leibniz rule
  double prod_part(int i, int j, int a, int b, int c) const {
    double s = 0.0;
    for (int aa = 0; aa <= a; ++aa)
      for (int bb = 0; bb <= b; ++bb)
        for (int cc = 0; cc <= c; ++cc) {
          double bin = binom(a, aa) * binom(b, bb) * binom(c, cc);
          s += bin * part(i, aa, bb, cc) * part(j, a - aa, b - bb, c - cc);
        }
    return s;
  }

  static double binom(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
  }

  // word derivative of the lifted map, all m components
  void word(const std::vector<OpTerm>& terms, double* out) const {
    int mf = f.dim_f;
    int m = veronese_dim(mf);
    for (int d = 0; d < m; ++d) out[d] = 0.0;
    const double r2 = std::sqrt(2.0);
    for (const auto& t : terms) {
      double w = t.coef * std::pow(p.y, t.ypow);
      if (w == 0.0) continue;
      for (int i = 0; i < mf; ++i) out[i] += w * part(i, t.a, t.b, t.c);
      int k = mf;
      for (int i = 0; i < mf; ++i)
        for (int j = i; j < mf; ++j) {
          double scale = (i == j) ? 1.0 : r2;
          out[k++] += w * scale * prod_part(i, j, t.a, t.b, t.c);
        }
    }
  }
};

}  // namespace

void Phi0::value(const Point& p, double* out) const {
  std::vector<double> v(f.dim_f);
  f.value(p, v.data());
  veronese(v.data(), f.dim_f, out);
}

void Phi0::word_deriv(const std::string& word, const Point& p, double* out) const {
  Phi0Eval ev{f, p, {}};
  ev.word(expand_word(word), out);
}

AnalyticField Phi0::as_field() const {
  AnalyticField out;
  out.dim = m;
  Phi0 self = *this;
  out.value = [self](const Point& p, double* o) { self.value(p, o); };
  out.deriv = [self](const Point& p, const std::string& w, double* o) {
    self.word_deriv(w, p, o);
  };
  return out;
}

double automorphy_residual(const AnalyticField& f, int grid_n) {
  const Point gens[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<double> a(f.dim), b(f.dim);
  double worst = 0.0;
  for (int i = 0; i <= grid_n; ++i)
    for (int j = 0; j <= grid_n; ++j)
      for (int k = 0; k <= grid_n; ++k) {
        // include the boundary faces of the fundamental domain
        if (i != 0 && i != grid_n && j != 0 && j != grid_n && k != 0 && k != grid_n &&
            (i % 4 || j % 4 || k % 4))
          continue;
        Point p{double(i) / grid_n, double(j) / grid_n, double(k) / grid_n};
        f.value(p, a.data());
        for (const Point& g : gens) {
          f.value(mul(p, g), b.data());  // right action p * gamma
          double r = 0.0;
          for (int d = 0; d < f.dim; ++d) r = std::max(r, std::abs(a[d] - b[d]));
          worst = std::max(worst, r);
        }
      }
  return worst;
}

namespace {

const char* kSixWords[6] = {"X", "Y", "Z", "XX", "YY", "XY"};

double min_six_wedge(const Phi0& phi, int grid_n, Point* argmin) {
  int m = phi.m;
  std::vector<double> stack(6 * std::size_t(m));
  double best = 1e300;
  std::vector<std::vector<OpTerm>> words;
  for (const char* w : kSixWords) words.push_back(expand_word(w));
#pragma omp parallel for collapse(2)
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      std::vector<double> st(6 * std::size_t(m));
      for (int k = 0; k < grid_n; ++k) {
        Point p{(i + 0.5) / grid_n, (j + 0.5) / grid_n, (k + 0.5) / grid_n};
        Phi0Eval ev{phi.f, p, {}};
        for (int w = 0; w < 6; ++w) ev.word(words[w], st.data() + w * m);
        double v = wedge_norm(st, 6, m);
#pragma omp critical
        {
          if (v < best) {
            best = v;
            if (argmin) *argmin = p;
          }
        }
      }
    }
  return best;
}

}  // namespace

Phi0 build_phi0(const AutomorphicMap& f, const Phi0Options& opt) {
  Phi0 phi;
  phi.f = f;
  phi.m = veronese_dim(f.dim_f);

  phi.automorphy_residual = automorphy_residual(f.as_field(), opt.grid_n);
  if (phi.automorphy_residual > opt.automorphy_tol)
    throw std::runtime_error("build_phi0: automorphy residual " +
                             std::to_string(phi.automorphy_residual) + " exceeds gate");

  // immersion gate on f itself
  double cf = 1e300;
  Point bad{};
  const int n = opt.grid_n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Point p{(i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n};
        Phi0Eval ev{f, p, {}};
        std::vector<double> st(3 * std::size_t(f.dim_f));
        static const std::vector<OpTerm> wx = expand_word("X"), wy = expand_word("Y"),
                                         wz = expand_word("Z");
        int mf = f.dim_f;
        auto fill = [&](const std::vector<OpTerm>& terms, double* out) {
          for (int d = 0; d < mf; ++d) out[d] = 0.0;
          for (const auto& t : terms)
            for (int d = 0; d < mf; ++d)
              out[d] += t.coef * std::pow(p.y, t.ypow) * ev.part(d, t.a, t.b, t.c);
        };
        fill(wx, st.data());
        fill(wy, st.data() + mf);
        fill(wz, st.data() + 2 * mf);
        double v = wedge_norm(st, 3, mf);
        if (v < cf) {
          cf = v;
          bad = p;
        }
      }
  phi.c_f = cf;
  if (!(cf > opt.immersion_floor))
    throw std::runtime_error("build_phi0: immersion gate failed, |Xf^Yf^Zf| = " +
                             std::to_string(cf) + " at [" + std::to_string(bad.x) + "," +
                             std::to_string(bad.y) + "," + std::to_string(bad.z) + "]");

  phi.c0 = min_six_wedge(phi, opt.grid_n, nullptr);
  phi.c0_refined = min_six_wedge(phi, 2 * opt.grid_n - 1, nullptr);
  if (!(phi.c0 > 0.0))
    throw std::runtime_error("build_phi0: freeness constant vanished on the grid");

  // measured C^j bounds on a coarse grid (certificate metadata)
  phi.Bj.assign(opt.max_bj + 1, 0.0);
  std::vector<std::string> words{""};
  for (int j = 0; j <= opt.max_bj; ++j) {
    double sup = 0.0;
    const int gn = opt.norm_grid_n;
    for (int i = 0; i < gn; ++i)
      for (int jj = 0; jj < gn; ++jj)
        for (int k = 0; k < gn; ++k) {
          Point p{(i + 0.5) / gn, (jj + 0.5) / gn, (k + 0.5) / gn};
          Phi0Eval ev{phi.f, p, {}};
          double ssq = 0.0;
          std::vector<double> buf(phi.m);
          for (const auto& w : words) {
            ev.word(expand_word(w), buf.data());
            for (int d = 0; d < phi.m; ++d) ssq += buf[d] * buf[d];
          }
          sup = std::max(sup, std::sqrt(ssq));
        }
    phi.Bj[j] = (j == 0 ? sup : phi.Bj[j - 1] + sup);
    // next gradient level
    std::vector<std::string> nw;
    for (const auto& w : words) {
      nw.push_back("X" + w);
      nw.push_back("Y" + w);
    }
    words = std::move(nw);
  }
  return phi;
}

void rescaled_phi0(const Phi0& phi, int n, double A, const Point& p, double* out) {
  double lam = std::pow(A, -double(n));
  phi.value(dilate(lam, p), out);
  double s = std::pow(A, double(n));
  for (int d = 0; d < phi.m; ++d) out[d] *= s;
}

AnalyticField rescaled_phi0_field(const Phi0& phi, int n, double A) {
  AnalyticField out;
  out.dim = phi.m;
  Phi0 self = phi;
  double lam = std::pow(A, -double(n));
  double amp = std::pow(A, double(n));
  out.value = [self, lam, amp](const Point& p, double* o) {
    self.value(dilate(lam, p), o);
    for (int d = 0; d < self.m; ++d) o[d] *= amp;
  };
  out.deriv = [self, lam, amp](const Point& p, const std::string& w, double* o) {
    // chain rule: each X or Y contributes lam, each Z contributes lam^2
    int deg = 0;
    for (char c : w) deg += (c == 'Z') ? 2 : 1;
    self.word_deriv(w, dilate(lam, p), o);
    double s = amp * std::pow(lam, double(deg));
    for (int d = 0; d < self.m; ++d) o[d] *= s;
  };
  return out;
}

}  // namespace heis
