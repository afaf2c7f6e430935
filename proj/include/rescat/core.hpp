#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rescat {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr std::size_t kSlowDim = 2;

/// Slow variables I. The phase is carried separately.
using SlowVector = std::array<double, kSlowDim>;

/// Reduces an angle to [0, 2*pi).
double wrap_phase(double phi);

/// Real cosine series sum_m a_m cos(m*phi) with strictly increasing m >= 1.
///
/// A series built by `geometric()` also carries a closed-form generator, so
/// `coefficient(m)` answers for any m, not only the stored terms.
class HarmonicSeries {
 public:
  struct Term {
    int m;
    double a;
  };

  struct Geometric {
    double first;  // a_1
    double ratio;  // a_{m+1} / a_m
  };

  HarmonicSeries() = default;
  explicit HarmonicSeries(std::vector<Term> terms);

  /// a_m = first * ratio^(m-1), with `count` terms materialised.
  static HarmonicSeries geometric(double first, double ratio, int count);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }
  const std::optional<Geometric>& closed_form() const noexcept { return closed_form_; }

  /// a_m; zero when the series has no such term.
  double coefficient(int m) const;

  /// Terms whose harmonic number is a multiple of n1.
  HarmonicSeries multiples_of(int n1) const;

 private:
  std::vector<Term> terms_;
  std::optional<Geometric> closed_form_;
};

double eval_harmonics(const HarmonicSeries& series, double phi);

/// dI/dt = f(I, phi, eps), dphi/dt = omega(I)/eps + g(I, phi, eps).
///
/// f and g are 2*pi-periodic in phi. `harmonics` maps a slow-component index to
/// the exact cosine series of f_j(I, phi, 0) when it is known. `averaged`
/// supplies F(J), the phase average of f at eps = 0; when it is empty the
/// average is taken by periodic trapezoid quadrature.
struct SlowFastSystem {
  using SlowField = std::function<SlowVector(const SlowVector&, double, double)>;
  using PhaseField = std::function<double(const SlowVector&, double, double)>;
  using Frequency = std::function<double(const SlowVector&)>;
  using Gradient = std::function<SlowVector(const SlowVector&)>;

  std::string id;
  std::size_t dim_slow = kSlowDim;
  SlowField f;
  PhaseField g;
  Frequency omega;
  Gradient omega_prime;
  Gradient averaged;
  double eps = 0.001;
  std::map<std::size_t, HarmonicSeries> harmonics;

  SlowVector averaged_field(const SlowVector& J) const;

  /// Harmonic series of slow component `component`, or nullptr.
  const HarmonicSeries* harmonics_for(std::size_t component) const;
};

inline constexpr double kDefaultEps = 0.001;

// The built-ins share omega(I) = I1 and dI1/dt = 1. Starting from I1(0) = -1
// the frequency passes through zero at t = 1, which the experiments cross on
// purpose; the valid domain is therefore all of R^2 and nothing is enforced.

/// dI2/dt = cos(phi).
SlowFastSystem builtin_test1(double eps = kDefaultEps);

/// dI2/dt = sum_{m=1}^{11} 2^{-(m-1)} cos(m*phi).
SlowFastSystem builtin_test11(double eps = kDefaultEps);

/// dI2/dt = (4 cos(phi) - 2) / (5 - 4 cos(phi)), the sum of the infinite series.
SlowFastSystem builtin_testinf(double eps = kDefaultEps);

/// Looks up a built-in by id ("test1", "test11", "testinf").
SlowFastSystem builtin(std::string_view id, double eps = kDefaultEps);

}  // namespace rescat
