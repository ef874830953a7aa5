#pragma once

// Exact polynomial algebra on R^n x R with rational coefficients.
//
// Monomials are x^a t^k with a multi-index `a` over the spatial variables and
// k the time exponent; the parabolic degree counts t twice: |a| + 2k. All
// coefficient arithmetic is exact (GMP rationals), which keeps spectral
// projections, commutator identities and frequency functionals free of
// roundoff. Numeric evaluation converts at the boundary only.

#include <gmpxx.h>

#include <Eigen/Dense>

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace calor {

using Rat = mpq_class;

double to_double(const Rat& q);
Rat rat_from_string(const std::string& s);  // "p/q" or decimal literal

struct Mono {
    std::vector<int> a;  // spatial exponents, size n
    int k = 0;           // time exponent

    friend bool operator==(const Mono& l, const Mono& r) = default;
    friend std::strong_ordering operator<=>(const Mono& l, const Mono& r) {
        if (auto c = l.a <=> r.a; c != 0) return c;
        return l.k <=> r.k;
    }
};

class Poly {
  public:
    explicit Poly(int n = 1) : n_(n) {}
    // Copies share the numeric table; loads/stores go through the shared_ptr
    // atomics so concurrent readers of one polynomial stay race-free.
    Poly(const Poly& o)
        : n_(o.n_),
          terms_(o.terms_),
          etab_(std::atomic_load_explicit(&o.etab_, std::memory_order_acquire)) {}
    Poly& operator=(const Poly& o) {
        if (this != &o) {
            n_ = o.n_;
            terms_ = o.terms_;
            std::atomic_store_explicit(
                &etab_, std::atomic_load_explicit(&o.etab_, std::memory_order_acquire),
                std::memory_order_release);
        }
        return *this;
    }
    static Poly constant(int n, const Rat& c);
    static Poly var(int n, int axis);   // x_axis
    static Poly tvar(int n);            // t

    int n() const { return n_; }
    bool is_zero() const { return terms_.empty(); }
    int num_terms() const { return (int)terms_.size(); }
    const std::map<Mono, Rat>& terms() const { return terms_; }

    // parabolic degree |a| + 2k (zero polynomial: -1)
    int pdeg() const;
    // spatial-only degree max |a|
    int sdeg() const;

    Poly& add_term(const Mono& m, const Rat& c);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Rat& c) const;
    friend Poly operator*(const Rat& c, const Poly& p) { return p * c; }
    bool operator==(const Poly& o) const { return n_ == o.n_ && terms_ == o.terms_; }

    Poly dx(int axis) const;
    Poly dt() const;
    Poly laplacian() const;
    std::vector<Poly> gradient() const;

    // substitute x -> x + x0, t -> t + t0 (recentre so that `x0` maps to 0)
    Poly shifted(const std::vector<Rat>& x0, const Rat& t0) const;
    // substitute x -> lambda x, t -> lambda^2 t
    Poly parabolic_scaled(const Rat& lambda) const;
    // substitute t := t0, leaving a polynomial in x alone
    Poly at_time(const Rat& t0) const;

    Rat eval(const std::vector<Rat>& x, const Rat& t) const;
    double eval(const Eigen::VectorXd& x, double t) const;

    // max over the coefficient list of |c| * prod(X^a) * T^k: a crude but
    // sound sup bound on |p| over the box {|x_i| <= X, |t| <= T}
    double sup_bound(double X, double T) const;

    std::string str() const;  // human-readable, for diagnostics

  private:
    // flat double-coefficient form of the terms, built on first numeric eval
    struct EvalTable {
        std::vector<double> coef;
        std::vector<int> ex;  // n_+1 exponents per term, time exponent last
    };

    int n_;
    std::map<Mono, Rat> terms_;
    mutable std::shared_ptr<const EvalTable> etab_;  // access via atomics only
    void prune(const Mono& m);
};

// One-dimensional heat polynomial in the variable x_axis and t:
//   h_0 = 1, h_1 = x, h_{m+1} = x h_m + 2 t m h_{m-1}.
// Caloric, parabolically homogeneous of degree m.
Poly heat_polynomial(int m, int axis, int n);

// Product basis element prod_i h_{alpha_i}(x_i, t).
Poly heat_basis(const std::vector<int>& alpha, int n);

// dt p - Laplacian p; identically zero exactly when p is caloric.
Poly heat_residual(const Poly& p);

// Drift operator at a rational base point:
//   A u = 2 (t0 - t) Laplacian(u) - (x - x0) . grad(u),
// the generator whose eigenfunctions on caloric polynomials are the
// degree-m pieces (A h = -m h).
struct DriftOperator {
    std::vector<Rat> x0;
    Rat t0;

    Poly apply(const Poly& u) const;
};

struct CommutatorResiduals {
    Poly spatial;   // (x2-x1).grad u - (2 A2 u - 2 A1 u - [A1,A2] u); == 0 always
    Poly temporal;  // 2 (t2-t1) dt u - ([A1,A2] u + A1 u - A2 u); == 0 iff u caloric
};

CommutatorResiduals commutator_residuals(const Poly& u, const DriftOperator& A1,
                                         const DriftOperator& A2);

// Exact spectral pieces of a caloric polynomial about a base point: u equals
// sum_m p_m((x,t) - base) with p_m parabolically homogeneous caloric of
// degree m. Throws on non-caloric input. The pieces are returned in the
// ambient frame (already shifted back), indexed by degree; absent degrees
// are zero polynomials.
std::vector<Poly> spectral_decompose(const Poly& u, const std::vector<Rat>& x0,
                                     const Rat& t0);

// u composed with the parabolic rescaling about a rational centre.
Poly parabolic_rescale(const Poly& u, const std::vector<Rat>& x0, const Rat& t0,
                       const Rat& lambda);

// JSON function-spec (de)serialization:
// {"n":2, "terms":[{"alpha":[1,0],"k":0,"coef":"3/2"}], "caloric_check":true}
Poly poly_from_spec(const std::string& json_text);
std::string poly_to_spec(const Poly& p, bool caloric_check);
Poly load_poly_spec(const std::string& path);

// deterministic random caloric polynomial: a rational-coefficient mixture of
// heat basis elements with parabolic degree <= maxdeg
Poly random_caloric(int n, int maxdeg, unsigned seed);

// helpers shared with the integration and frequency layers
Rat rat_factorial(int m);
std::vector<std::vector<int>> multi_indices(int n, int max_total);

// Exact integral of a spatial polynomial (no t powers) against the centred
// Gaussian with per-axis variance 2*tau. Throws if the integrand has time
// dependence left.
Rat gauss_moment_integral(const Poly& p, const Rat& tau);

} // namespace calor
