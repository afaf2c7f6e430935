#include "rescat/core.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rescat/error.hpp"

namespace rescat {

IntegrationDiverged::IntegrationDiverged(std::size_t step, double t)
    : Error("integration diverged at step " + std::to_string(step) + " (t = " + std::to_string(t) + ")"),
      step_(step),
      t_(t) {}

OverlappingResonance::OverlappingResonance(int n1, int n2, double t_star)
    : Error("measurement window contains resonance (n1=" + std::to_string(n1) + ", n2=" + std::to_string(n2) +
            ") at t=" + std::to_string(t_star)),
      n1_(n1),
      n2_(n2),
      t_star_(t_star) {}

double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

HarmonicSeries::HarmonicSeries(std::vector<Term> terms) : terms_(std::move(terms)) {
  int prev = 0;
  for (const Term& term : terms_) {
    if (term.m <= prev) throw InvalidArgument("harmonic numbers must be >= 1 and strictly increasing");
    prev = term.m;
  }
}

HarmonicSeries HarmonicSeries::geometric(double first, double ratio, int count) {
  if (count < 1) throw InvalidArgument("geometric series needs at least one term");
  std::vector<Term> terms;
  terms.reserve(static_cast<std::size_t>(count));
  double a = first;
  for (int m = 1; m <= count; ++m) {
    terms.push_back({m, a});
    a *= ratio;
  }
  HarmonicSeries series(std::move(terms));
  series.closed_form_ = Geometric{first, ratio};
  return series;
}

double HarmonicSeries::coefficient(int m) const {
  if (m < 1) return 0.0;
  if (closed_form_) return closed_form_->first * std::pow(closed_form_->ratio, m - 1);
  for (const Term& term : terms_) {
    if (term.m == m) return term.a;
    if (term.m > m) break;
  }
  return 0.0;
}

HarmonicSeries HarmonicSeries::multiples_of(int n1) const {
  if (n1 < 1) throw InvalidArgument("n1 must be positive");
  std::vector<Term> kept;
  for (const Term& term : terms_) {
    if (term.m % n1 == 0 && term.a != 0.0) kept.push_back(term);
  }
  return HarmonicSeries(std::move(kept));
}

double eval_harmonics(const HarmonicSeries& series, double phi) {
  double sum = 0.0;
  for (const auto& [m, a] : series.terms()) sum += a * std::cos(m * phi);
  return sum;
}

SlowVector SlowFastSystem::averaged_field(const SlowVector& J) const {
  if (averaged) return averaged(J);
  // Periodic trapezoid rule: exact for trigonometric polynomials of degree < 512.
  constexpr int kNodes = 512;
  SlowVector sum{};
  for (int k = 0; k < kNodes; ++k) {
    const SlowVector v = f(J, kTwoPi * k / kNodes, 0.0);
    for (std::size_t j = 0; j < kSlowDim; ++j) sum[j] += v[j];
  }
  for (double& s : sum) s /= kNodes;
  return sum;
}

const HarmonicSeries* SlowFastSystem::harmonics_for(std::size_t component) const {
  const auto it = harmonics.find(component);
  return it == harmonics.end() ? nullptr : &it->second;
}

namespace {

SlowFastSystem rotating_phase_system(std::string id, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  SlowFastSystem sys;
  sys.id = std::move(id);
  sys.eps = eps;
  sys.g = [](const SlowVector&, double, double) { return 0.0; };
  sys.omega = [](const SlowVector& I) { return I[0]; };
  sys.omega_prime = [](const SlowVector&) { return SlowVector{1.0, 0.0}; };
  // Every harmonic of the built-ins averages to zero.
  sys.averaged = [](const SlowVector&) { return SlowVector{1.0, 0.0}; };
  return sys;
}

// Index of I2 in SlowVector.
constexpr std::size_t kI2 = 1;

}  // namespace

SlowFastSystem builtin_test1(double eps) {
  SlowFastSystem sys = rotating_phase_system("test1", eps);
  sys.f = [](const SlowVector&, double phi, double) { return SlowVector{1.0, std::cos(phi)}; };
  sys.harmonics.emplace(kI2, HarmonicSeries({{1, 1.0}}));
  return sys;
}

SlowFastSystem builtin_test11(double eps) {
  SlowFastSystem sys = rotating_phase_system("test11", eps);
  std::vector<HarmonicSeries::Term> terms;
  double a = 1.0;
  for (int m = 1; m <= 11; ++m, a *= 0.5) terms.push_back({m, a});
  HarmonicSeries series(std::move(terms));
  sys.f = [series](const SlowVector&, double phi, double) { return SlowVector{1.0, eval_harmonics(series, phi)}; };
  sys.harmonics.emplace(kI2, std::move(series));
  return sys;
}

SlowFastSystem builtin_testinf(double eps) {
  SlowFastSystem sys = rotating_phase_system("testinf", eps);
  sys.f = [](const SlowVector&, double phi, double) {
    const double c = std::cos(phi);
    return SlowVector{1.0, (4.0 * c - 2.0) / (5.0 - 4.0 * c)};
  };
  // 2^-63 is below double resolution relative to a_1.
  sys.harmonics.emplace(kI2, HarmonicSeries::geometric(1.0, 0.5, 64));
  return sys;
}

SlowFastSystem builtin(std::string_view id, double eps) {
  if (id == "test1") return builtin_test1(eps);
  if (id == "test11") return builtin_test11(eps);
  if (id == "testinf") return builtin_testinf(eps);
  throw InvalidArgument("unknown system '" + std::string(id) + "' (expected test1, test11 or testinf)");
}

}  // namespace rescat
