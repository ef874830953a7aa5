#include "calor/caloricpoly.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace calor {

double to_double(const Rat& q) { return mpq_get_d(q.get_mpq_t()); }

Rat rat_from_string(const std::string& s) {
    std::string str = s;
    if (!str.empty() && str[0] == '+') str = str.substr(1);
    auto slash = str.find('/');
    if (slash != std::string::npos) {
        Rat q(str);
        q.canonicalize();
        return q;
    }
    auto dot = str.find('.');
    if (dot == std::string::npos) {
        Rat q(str);
        q.canonicalize();
        return q;
    }
    std::string digits = str.substr(0, dot) + str.substr(dot + 1);
    std::size_t frac = str.size() - dot - 1;
    mpz_class num(digits);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Rat q(num, den);
    q.canonicalize();
    return q;
}

namespace {

Rat make_rat(long p, long q = 1) {
    Rat r(p, q);
    r.canonicalize();
    return r;
}

Rat rat_pow(const Rat& b, int e) {
    if (e < 0) throw std::runtime_error("rat_pow: negative exponent");
    Rat out = 1;
    Rat base = b;
    int m = e;
    while (m > 0) {
        if (m & 1) out *= base;
        base *= base;
        m >>= 1;
    }
    return out;
}

mpz_class binom(int n, int k) {
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return b;
}

} // namespace

Rat rat_factorial(int m) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), m);
    return Rat(f);
}

std::vector<std::vector<int>> multi_indices(int n, int max_total) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == n) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[axis] = e;
            rec(axis + 1, left - e);
        }
        cur[axis] = 0;
    };
    rec(0, max_total);
    return out;
}

// ---------------------------------------------------------------- Poly ----

Poly Poly::constant(int n, const Rat& c) {
    Poly p(n);
    p.add_term(Mono{std::vector<int>(n, 0), 0}, c);
    return p;
}

Poly Poly::var(int n, int axis) {
    if (axis < 0 || axis >= n) throw std::runtime_error("Poly::var: axis out of range");
    Poly p(n);
    Mono m{std::vector<int>(n, 0), 0};
    m.a[axis] = 1;
    p.add_term(m, 1);
    return p;
}

Poly Poly::tvar(int n) {
    Poly p(n);
    p.add_term(Mono{std::vector<int>(n, 0), 1}, 1);
    return p;
}

int Poly::pdeg() const {
    int d = -1;
    for (const auto& [m, c] : terms_) {
        int s = m.k * 2;
        for (int e : m.a) s += e;
        d = std::max(d, s);
    }
    return d;
}

int Poly::sdeg() const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (int e : m.a) s += e;
        d = std::max(d, s);
    }
    return d;
}

void Poly::prune(const Mono& m) {
    auto it = terms_.find(m);
    if (it != terms_.end() && it->second == 0) terms_.erase(it);
}

Poly& Poly::add_term(const Mono& m, const Rat& c) {
    if ((int)m.a.size() != n_) throw std::runtime_error("Poly::add_term: arity mismatch");
    auto& slot = terms_[m];
    slot += c;
    prune(m);
    std::atomic_store_explicit(&etab_, std::shared_ptr<const EvalTable>(),
                               std::memory_order_release);
    return *this;
}

Poly Poly::operator+(const Poly& o) const {
    if (n_ != o.n_) throw std::runtime_error("Poly: dimension mismatch");
    Poly r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

Poly Poly::operator*(const Rat& c) const {
    Poly r(n_);
    if (c == 0) return r;
    for (const auto& [m, q] : terms_) r.terms_[m] = q * c;
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    if (n_ != o.n_) throw std::runtime_error("Poly: dimension mismatch");
    Poly r(n_);
    for (const auto& [m1, c1] : terms_) {
        for (const auto& [m2, c2] : o.terms_) {
            Mono m = m1;
            m.k += m2.k;
            for (int i = 0; i < n_; ++i) m.a[i] += m2.a[i];
            r.add_term(m, c1 * c2);
        }
    }
    return r;
}

Poly Poly::dx(int axis) const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) {
        if (m.a[axis] == 0) continue;
        Mono d = m;
        d.a[axis] -= 1;
        r.add_term(d, c * m.a[axis]);
    }
    return r;
}

Poly Poly::dt() const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) {
        if (m.k == 0) continue;
        Mono d = m;
        d.k -= 1;
        r.add_term(d, c * m.k);
    }
    return r;
}

Poly Poly::laplacian() const {
    Poly r(n_);
    for (int i = 0; i < n_; ++i) r = r + dx(i).dx(i);
    return r;
}

std::vector<Poly> Poly::gradient() const {
    std::vector<Poly> g;
    g.reserve(n_);
    for (int i = 0; i < n_; ++i) g.push_back(dx(i));
    return g;
}

Poly Poly::shifted(const std::vector<Rat>& x0, const Rat& t0) const {
    if ((int)x0.size() != n_) throw std::runtime_error("Poly::shifted: arity mismatch");
    Poly r(n_);
    for (const auto& [m, c] : terms_) {
        // expand c * prod (x_i + x0_i)^{a_i} * (t + t0)^k
        Poly term = Poly::constant(n_, c);
        for (int i = 0; i < n_; ++i) {
            if (m.a[i] == 0) continue;
            Poly fac(n_);
            for (int j = 0; j <= m.a[i]; ++j) {
                Mono mm{std::vector<int>(n_, 0), 0};
                mm.a[i] = j;
                fac.add_term(mm, Rat(binom(m.a[i], j)) * rat_pow(x0[i], m.a[i] - j));
            }
            term = term * fac;
        }
        if (m.k > 0) {
            Poly fac(n_);
            for (int j = 0; j <= m.k; ++j)
                fac.add_term(Mono{std::vector<int>(n_, 0), j},
                             Rat(binom(m.k, j)) * rat_pow(t0, m.k - j));
            term = term * fac;
        }
        r = r + term;
    }
    return r;
}

Poly Poly::parabolic_scaled(const Rat& lambda) const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) {
        int s = 2 * m.k;
        for (int e : m.a) s += e;
        r.add_term(m, c * rat_pow(lambda, s));
    }
    return r;
}

Poly Poly::at_time(const Rat& t0) const {
    Poly r(n_);
    for (const auto& [m, c] : terms_) {
        Mono mm = m;
        mm.k = 0;
        r.add_term(mm, c * rat_pow(t0, m.k));
    }
    return r;
}

Rat Poly::eval(const std::vector<Rat>& x, const Rat& t) const {
    if ((int)x.size() != n_) throw std::runtime_error("Poly::eval: arity mismatch");
    Rat out = 0;
    for (const auto& [m, c] : terms_) {
        Rat v = c;
        for (int i = 0; i < n_; ++i)
            if (m.a[i] > 0) v *= rat_pow(x[i], m.a[i]);
        if (m.k > 0) v *= rat_pow(t, m.k);
        out += v;
    }
    return out;
}

double Poly::eval(const Eigen::VectorXd& x, double t) const {
    auto tab = std::atomic_load_explicit(&etab_, std::memory_order_acquire);
    if (!tab) {
        auto fresh = std::make_shared<EvalTable>();
        fresh->coef.reserve(terms_.size());
        fresh->ex.reserve(terms_.size() * (std::size_t)(n_ + 1));
        for (const auto& [m, c] : terms_) {
            fresh->coef.push_back(to_double(c));
            for (int i = 0; i < n_; ++i) fresh->ex.push_back(m.a[i]);
            fresh->ex.push_back(m.k);
        }
        tab = fresh;
        std::atomic_store_explicit(&etab_, std::shared_ptr<const EvalTable>(tab),
                                   std::memory_order_release);
    }
    double out = 0;
    const int* e = tab->ex.data();
    for (double v : tab->coef) {
        for (int i = 0; i < n_; ++i)
            for (int q = 0; q < e[i]; ++q) v *= x(i);
        for (int q = 0; q < e[n_]; ++q) v *= t;
        out += v;
        e += n_ + 1;
    }
    return out;
}

double Poly::sup_bound(double X, double T) const {
    double out = 0;
    for (const auto& [m, c] : terms_) {
        double v = std::fabs(to_double(c));
        for (int i = 0; i < n_; ++i)
            for (int e = 0; e < m.a[i]; ++e) v *= X;
        for (int e = 0; e < m.k; ++e) v *= T;
        out += v;
    }
    return out;
}

std::string Poly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.get_str();
        for (int i = 0; i < n_; ++i)
            if (m.a[i] > 0) os << "*x" << i + 1 << "^" << m.a[i];
        if (m.k > 0) os << "*t^" << m.k;
    }
    return os.str();
}

// ------------------------------------------------------ heat polynomials --

Poly heat_polynomial(int m, int axis, int n) {
    if (m < 0) throw std::runtime_error("heat_polynomial: negative degree");
    Poly h0 = Poly::constant(n, 1);
    if (m == 0) return h0;
    Poly x = Poly::var(n, axis);
    Poly h1 = x;
    if (m == 1) return h1;
    Poly t = Poly::tvar(n);
    for (int j = 1; j < m; ++j) {
        Poly h2 = x * h1 + t * h0 * make_rat(2 * j);
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

Poly heat_basis(const std::vector<int>& alpha, int n) {
    if ((int)alpha.size() != n) throw std::runtime_error("heat_basis: arity mismatch");
    Poly p = Poly::constant(n, 1);
    for (int i = 0; i < n; ++i)
        if (alpha[i] > 0) p = p * heat_polynomial(alpha[i], i, n);
    return p;
}

Poly heat_residual(const Poly& p) { return p.dt() - p.laplacian(); }

Poly DriftOperator::apply(const Poly& u) const {
    int n = u.n();
    if ((int)x0.size() != n) throw std::runtime_error("DriftOperator: arity mismatch");
    Poly tfac = Poly::constant(n, t0) - Poly::tvar(n);
    Poly out = tfac * u.laplacian() * make_rat(2);
    for (int i = 0; i < n; ++i) {
        Poly xfac = Poly::var(n, i) - Poly::constant(n, x0[i]);
        out = out - xfac * u.dx(i);
    }
    return out;
}

CommutatorResiduals commutator_residuals(const Poly& u, const DriftOperator& A1,
                                         const DriftOperator& A2) {
    int n = u.n();
    Poly a1u = A1.apply(u);
    Poly a2u = A2.apply(u);
    Poly comm = A1.apply(a2u) - A2.apply(a1u);

    Poly dir(n);  // (x2 - x1) . grad u
    for (int i = 0; i < n; ++i) dir = dir + u.dx(i) * (A2.x0[i] - A1.x0[i]);

    CommutatorResiduals r{};
    r.spatial = dir - (a2u * make_rat(2) - a1u * make_rat(2) - comm);
    r.temporal = u.dt() * ((A2.t0 - A1.t0) * make_rat(2)) - (comm + a1u - a2u);
    return r;
}

// ------------------------------------------------- spectral decomposition --

Rat gauss_moment_integral(const Poly& p, const Rat& tau) {
    if (tau <= 0) throw std::runtime_error("gauss_moment_integral: tau must be positive");
    Rat out = 0;
    Rat twotau = tau * 2;
    for (const auto& [m, c] : p.terms()) {
        if (m.k != 0)
            throw std::runtime_error("gauss_moment_integral: integrand must be spatial");
        Rat v = c;
        bool zero = false;
        for (std::size_t i = 0; i < m.a.size() && !zero; ++i) {
            int e = m.a[i];
            if (e % 2 == 1) {
                zero = true;
                break;
            }
            if (e > 0) {
                // E z^e = (e-1)!! (2 tau)^{e/2}
                mpz_class df;
                mpz_2fac_ui(df.get_mpz_t(), e - 1);
                v *= Rat(df) * rat_pow(twotau, e / 2);
            }
        }
        if (!zero) out += v;
    }
    return out;
}

std::vector<Poly> spectral_decompose(const Poly& u, const std::vector<Rat>& x0,
                                     const Rat& t0) {
    if (!heat_residual(u).is_zero())
        throw std::runtime_error("spectral_decompose: input is not caloric");
    int n = u.n();
    Poly v = u.shifted(x0, t0);
    int maxdeg = std::max(v.pdeg(), 0);

    const Rat tau = 1;
    Poly slice = v.at_time(-tau);

    std::vector<Poly> pieces((std::size_t)maxdeg + 1, Poly(n));
    std::vector<Rat> neg_x0(n), neg0(n, 0);
    for (int i = 0; i < n; ++i) neg_x0[i] = -x0[i];

    Poly total(n);
    for (const auto& alpha : multi_indices(n, maxdeg)) {
        int deg = 0;
        for (int e : alpha) deg += e;
        Poly hb = heat_basis(alpha, n);
        Poly hslice = hb.at_time(-tau);
        Rat inner = gauss_moment_integral(slice * hslice, tau);
        if (inner == 0) continue;
        Rat norm = 1;
        for (int e : alpha) norm *= rat_factorial(e);
        norm *= rat_pow(tau * 2, deg);
        Rat coef = inner / norm;
        pieces[(std::size_t)deg] = pieces[(std::size_t)deg] + hb * coef;
        total = total + hb * coef;
    }
    if (!(total == v))
        throw std::runtime_error("spectral_decompose: reconstruction mismatch");

    Rat neg_t0 = -t0;
    for (auto& p : pieces) p = p.shifted(neg_x0, neg_t0);
    return pieces;
}

Poly parabolic_rescale(const Poly& u, const std::vector<Rat>& x0, const Rat& t0,
                       const Rat& lambda) {
    std::vector<Rat> neg_x0(u.n());
    for (int i = 0; i < u.n(); ++i) neg_x0[i] = -x0[i];
    return u.shifted(x0, t0).parabolic_scaled(lambda).shifted(neg_x0, -t0);
}

// ----------------------------------------------------------------- specs --

Poly poly_from_spec(const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    if (!j.contains("n") || !j.contains("terms"))
        throw std::runtime_error("poly_from_spec: need fields 'n' and 'terms'");
    int n = j.at("n").get<int>();
    if (n < 1 || n > 16) throw std::runtime_error("poly_from_spec: n out of range");
    Poly p(n);
    for (const auto& term : j.at("terms")) {
        std::vector<int> alpha = term.at("alpha").get<std::vector<int>>();
        if ((int)alpha.size() != n)
            throw std::runtime_error("poly_from_spec: alpha arity mismatch");
        int k = term.value("k", 0);
        if (k < 0) throw std::runtime_error("poly_from_spec: negative t power");
        for (int e : alpha)
            if (e < 0) throw std::runtime_error("poly_from_spec: negative exponent");
        Rat c = rat_from_string(term.at("coef").get<std::string>());
        p.add_term(Mono{alpha, k}, c);
    }
    if (j.value("caloric_check", false) && !heat_residual(p).is_zero())
        throw std::runtime_error("poly_from_spec: caloric_check failed");
    return p;
}

std::string poly_to_spec(const Poly& p, bool caloric_check) {
    nlohmann::json j;
    j["n"] = p.n();
    j["terms"] = nlohmann::json::array();
    for (const auto& [m, c] : p.terms()) {
        nlohmann::json term;
        term["alpha"] = m.a;
        term["k"] = m.k;
        term["coef"] = c.get_str();
        j["terms"].push_back(term);
    }
    j["caloric_check"] = caloric_check;
    return j.dump(2);
}

Poly load_poly_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_poly_spec: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return poly_from_spec(ss.str());
}

Poly random_caloric(int n, int maxdeg, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nterms(3, 6);
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 4);
    auto indices = multi_indices(n, maxdeg);
    std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);

    Poly p(n);
    int m = nterms(rng);
    for (int i = 0; i < m; ++i) {
        int c = num(rng);
        if (c == 0) c = 1;
        p = p + heat_basis(indices[pick(rng)], n) * make_rat(c, den(rng));
    }
    if (p.is_zero()) p = Poly::constant(n, 1);
    return p;
}

} // namespace calor
