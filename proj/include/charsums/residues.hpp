#pragma once

// Exact arithmetic in Z/qZ and the full Dirichlet character group mod q.
//
// Characters are stored as exponent vectors against a fixed generator basis
// of (Z/qZ)^x, never as value tables; values are materialized on demand.
// Evaluation goes through dense discrete-log tables built once per modulus,
// and root-of-unity arithmetic is carried as a rational angle until a complex
// value is requested, so products, conjugates and conductor computations stay
// exact.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "charsums/core.hpp"

namespace charsums {

// ---------------------------------------------------------------------------
// Integer helpers
// ---------------------------------------------------------------------------

struct Factorization {
    std::uint64_t n = 1;
    // (prime, exponent), primes strictly increasing, exponents >= 1.
    std::vector<std::pair<std::uint64_t, int>> factors;
};

inline Factorization factorize(std::uint64_t n) {
    if (n == 0) throw std::domain_error("factorize: n must be positive");
    Factorization f;
    f.n = n;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            f.factors.emplace_back(p, e);
        }
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    return f;
}

inline std::uint64_t euler_phi(std::uint64_t n) {
    std::uint64_t phi = 1;
    for (auto [p, e] : factorize(n).factors) {
        std::uint64_t pe = 1;
        for (int i = 1; i < e; ++i) pe *= p;
        phi *= pe * (p - 1);
    }
    return phi;
}

inline int mobius(std::uint64_t n) {
    int mu = 1;
    for (auto [p, e] : factorize(n).factors) {
        (void)p;
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

inline std::uint64_t divisor_count(std::uint64_t n) {
    std::uint64_t d = 1;
    for (auto [p, e] : factorize(n).factors) { (void)p; d *= static_cast<std::uint64_t>(e) + 1; }
    return d;
}

inline std::vector<std::uint64_t> divisors_of(std::uint64_t n) {
    std::vector<std::uint64_t> divs{1};
    for (auto [p, e] : factorize(n).factors) {
        const std::size_t m = divs.size();
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) {
            pe *= p;
            for (std::size_t j = 0; j < m; ++j) divs.push_back(divs[j] * pe);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

inline bool is_cube_free(std::uint64_t n) {
    for (auto [p, e] : factorize(n).factors) { (void)p; if (e >= 3) return false; }
    return true;
}

// Reduce an arbitrary (possibly negative) integer mod m into [0, m).
inline std::uint64_t mod_reduce(std::int64_t a, std::uint64_t m) {
    std::int64_t r = a % static_cast<std::int64_t>(m);
    if (r < 0) r += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(r);
}

inline std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mod_mul(r, base, m);
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Inverse of a mod m; throws if gcd(a, m) != 1.
inline std::uint64_t mod_inverse(std::int64_t a, std::uint64_t m) {
    std::int64_t t = 0, newt = 1;
    std::int64_t r = static_cast<std::int64_t>(m), newr = static_cast<std::int64_t>(mod_reduce(a, m));
    while (newr != 0) {
        const std::int64_t quot = r / newr;
        std::swap(t -= quot * newt, newt);
        std::swap(r -= quot * newr, newr);
    }
    if (r > 1) throw std::domain_error("mod_inverse: argument not invertible");
    if (t < 0) t += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(t);
}

// gcd with the convention gcd(0, q) = q.
inline std::uint64_t gcd_u(std::int64_t a, std::uint64_t q) {
    return std::gcd(mod_reduce(a, q == 0 ? 1 : q), q);
}

// The q^infinity-part of n (largest divisor of n supported on primes of q)
// and the complementary coprime part.
inline std::pair<std::uint64_t, std::uint64_t> split_q_part(std::uint64_t n, std::uint64_t q) {
    std::uint64_t part = 1;
    for (auto [p, e] : factorize(q).factors) {
        (void)e;
        while (n % p == 0) { n /= p; part *= p; }
    }
    return {part, n};
}

// ---------------------------------------------------------------------------
// UnitGroupBasis: generators, orders and discrete-log tables for (Z/qZ)^x
// ---------------------------------------------------------------------------

class UnitGroupBasis {
  public:
    // Dense dlog tables make this quadratic-ish in memory per component, so a
    // cap is enforced; 4*10^6 is far above desk scale.
    static constexpr std::uint64_t kModulusCap = 4'000'000;

    struct Component {
        std::uint64_t prime = 0;
        int exponent = 0;
        std::uint64_t prime_power = 1;
        // Generators of (Z/p^e Z)^x. One entry except for 2^e, e >= 3, which
        // uses the pair {-1, 5}.
        std::vector<std::uint64_t> generators;
        std::vector<std::uint64_t> orders;
        // dlog[a * ngen + i] = exponent of generators[i] for unit a mod p^e.
        std::vector<std::uint32_t> dlog;
    };

    explicit UnitGroupBasis(std::uint64_t q) : q_(q) {
        if (q == 0) throw std::domain_error("UnitGroupBasis: q must be positive");
        if (q > kModulusCap) throw CapacityError("UnitGroupBasis: modulus exceeds table cap");
        for (auto [p, e] : factorize(q).factors) components_.push_back(build_component(p, e));
        phi_ = 1;
        for (const auto& c : components_) {
            phi_ *= euler_phi(c.prime_power);
            for (auto d : c.orders) orders_.push_back(d);
        }
        lcm_ = 1;
        for (auto d : orders_) lcm_ = std::lcm(lcm_, d);
        roots_.resize(lcm_);
        for (std::uint64_t j = 0; j < lcm_; ++j) {
            const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(lcm_);
            roots_[j] = Complex(std::cos(theta), std::sin(theta));
        }
    }

    std::uint64_t modulus() const { return q_; }
    std::uint64_t phi() const { return phi_; }
    std::uint64_t order_lcm() const { return lcm_; }
    const std::vector<std::uint64_t>& orders() const { return orders_; }
    const std::vector<Component>& components() const { return components_; }
    std::size_t generator_count() const { return orders_.size(); }

    bool is_unit(std::int64_t a) const { return std::gcd(mod_reduce(a, q_), q_) == 1; }

    // The group element of (Z/qZ)^x represented by generator gen_idx of
    // component comp_idx: congruent to the generator in its own component and
    // to 1 in every other component.
    std::uint64_t generator_element(std::size_t comp_idx, std::size_t gen_idx) const {
        const auto& c = components_[comp_idx];
        const std::uint64_t pe = c.prime_power;
        const std::uint64_t g = c.generators[gen_idx];
        const std::uint64_t m = q_ / pe;
        if (m == 1) return g % q_;
        const std::uint64_t t = mod_mul(mod_reduce(static_cast<std::int64_t>(g) - 1, pe),
                                        mod_inverse(static_cast<std::int64_t>(m % pe), pe), pe);
        return (1 + m * t) % q_;
    }

    // Exponent vector of a against the generators; false if a is not a unit.
    bool dlog(std::int64_t a, std::vector<std::uint32_t>& out) const {
        const std::uint64_t r = mod_reduce(a, q_);
        if (std::gcd(r, q_) != 1) return false;
        out.clear();
        for (const auto& c : components_) {
            const std::uint64_t ar = r % c.prime_power;
            const std::size_t ng = c.generators.size();
            for (std::size_t i = 0; i < ng; ++i) out.push_back(c.dlog[ar * ng + i]);
        }
        return true;
    }

    Complex root_of_unity(std::uint64_t num_mod_lcm) const { return roots_[num_mod_lcm]; }

  private:
    static Component build_component(std::uint64_t p, int e) {
        Component c;
        c.prime = p;
        c.exponent = e;
        c.prime_power = 1;
        for (int i = 0; i < e; ++i) c.prime_power *= p;
        const std::uint64_t pe = c.prime_power;

        if (p == 2) {
            if (e == 1) return c;  // (Z/2)^x trivial
            if (e == 2) {
                c.generators = {3};
                c.orders = {2};
            } else {
                c.generators = {pe - 1, 5};  // {-1, 5}
                c.orders = {2, pe / 4};
            }
        } else {
            const std::uint64_t phi = pe / p * (p - 1);
            const auto phi_primes = factorize(phi).factors;
            std::uint64_t g = 2;
            for (;; ++g) {
                if (g % p == 0) continue;
                bool primitive = true;
                for (auto [ell, unused] : phi_primes) {
                    (void)unused;
                    if (mod_pow(g, phi / ell, pe) == 1) { primitive = false; break; }
                }
                if (primitive) break;
            }
            c.generators = {g};
            c.orders = {phi};
        }

        const std::size_t ng = c.generators.size();
        c.dlog.assign(pe * ng, 0xFFFFFFFFu);
        if (ng == 1) {
            std::uint64_t v = 1;
            for (std::uint64_t x = 0; x < c.orders[0]; ++x) {
                c.dlog[v] = static_cast<std::uint32_t>(x);
                v = mod_mul(v, c.generators[0], pe);
            }
        } else {
            // 2^e, e >= 3: every odd residue is (-1)^s * 5^x.
            std::uint64_t v = 1;
            for (std::uint64_t x = 0; x < c.orders[1]; ++x) {
                c.dlog[v * 2 + 0] = 0;
                c.dlog[v * 2 + 1] = static_cast<std::uint32_t>(x);
                const std::uint64_t w = pe - v;
                c.dlog[w * 2 + 0] = 1;
                c.dlog[w * 2 + 1] = static_cast<std::uint32_t>(x);
                v = mod_mul(v, 5, pe);
            }
        }
        return c;
    }

    std::uint64_t q_;
    std::uint64_t phi_ = 1;
    std::uint64_t lcm_ = 1;
    std::vector<Component> components_;
    std::vector<std::uint64_t> orders_;
    std::vector<Complex> roots_;
};

// Bases are immutable once built; share them process-wide.
inline std::shared_ptr<const UnitGroupBasis> unit_basis(std::uint64_t q) {
    static std::mutex mu;
    static std::map<std::uint64_t, std::shared_ptr<const UnitGroupBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q);
    if (it != cache.end()) return it->second;
    auto basis = std::make_shared<const UnitGroupBasis>(q);
    cache.emplace(q, basis);
    return basis;
}

// ---------------------------------------------------------------------------
// DirichletCharacter
// ---------------------------------------------------------------------------

class DirichletCharacter {
  public:
    DirichletCharacter() : DirichletCharacter(principal(1)) {}

    static DirichletCharacter principal(std::uint64_t q) {
        auto b = unit_basis(q);
        return DirichletCharacter(b, std::vector<std::uint32_t>(b->generator_count(), 0));
    }

    static DirichletCharacter from_exponents(std::uint64_t q, std::vector<std::uint32_t> expo) {
        auto b = unit_basis(q);
        if (expo.size() != b->generator_count())
            throw std::domain_error("DirichletCharacter: exponent vector length mismatch");
        for (std::size_t i = 0; i < expo.size(); ++i) expo[i] %= static_cast<std::uint32_t>(b->orders()[i]);
        return DirichletCharacter(std::move(b), std::move(expo));
    }

    // All phi(q) characters mod q in lexicographic exponent order.
    static std::vector<DirichletCharacter> enumerate_all(std::uint64_t q) {
        auto b = unit_basis(q);
        const auto& ords = b->orders();
        std::vector<DirichletCharacter> out;
        std::vector<std::uint32_t> e(ords.size(), 0);
        for (;;) {
            out.emplace_back(DirichletCharacter(b, e));
            std::size_t i = ords.size();
            while (i > 0) {
                --i;
                if (++e[i] < ords[i]) break;
                e[i] = 0;
                if (i == 0) return out;
            }
            if (ords.empty()) return out;
        }
    }

    std::uint64_t modulus() const { return basis_->modulus(); }
    const std::vector<std::uint32_t>& exponents() const { return expo_; }
    const UnitGroupBasis& basis() const { return *basis_; }

    bool is_principal() const {
        return std::all_of(expo_.begin(), expo_.end(), [](std::uint32_t e) { return e == 0; });
    }

    // chi(a) as an exact root of unity (or zero off the units).
    RootAngle angle_at(std::int64_t a) const {
        thread_local std::vector<std::uint32_t> x;
        if (!basis_->dlog(a, x)) return RootAngle::zero_value();
        const std::uint64_t L = basis_->order_lcm();
        std::uint64_t num = 0;
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < expo_.size(); ++i) {
            const std::uint64_t term = (static_cast<std::uint64_t>(expo_[i]) * x[i]) % ords[i];
            num = (num + term * (L / ords[i])) % L;
        }
        return RootAngle{false, static_cast<std::int64_t>(num), static_cast<std::int64_t>(L)};
    }

    Complex eval(std::int64_t a) const {
        thread_local std::vector<std::uint32_t> x;
        if (!basis_->dlog(a, x)) return Complex(0.0, 0.0);
        const std::uint64_t L = basis_->order_lcm();
        std::uint64_t num = 0;
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < expo_.size(); ++i) {
            const std::uint64_t term = (static_cast<std::uint64_t>(expo_[i]) * x[i]) % ords[i];
            num = (num + term * (L / ords[i])) % L;
        }
        return basis_->root_of_unity(num);
    }

    // chi(a) for a = 0..q-1 as a dense table; the workhorse for sum loops.
    std::vector<Complex> value_table() const {
        const std::uint64_t q = modulus();
        std::vector<Complex> t(q == 0 ? 1 : q);
        if (q == 1) { t[0] = Complex(1.0, 0.0); return t; }
        for (std::uint64_t a = 0; a < q; ++a) t[a] = eval(static_cast<std::int64_t>(a));
        return t;
    }

    DirichletCharacter operator*(const DirichletCharacter& o) const {
        if (o.modulus() != modulus())
            throw std::domain_error("DirichletCharacter: product requires equal moduli");
        std::vector<std::uint32_t> e(expo_.size());
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] = static_cast<std::uint32_t>((static_cast<std::uint64_t>(expo_[i]) + o.expo_[i]) % ords[i]);
        return DirichletCharacter(basis_, std::move(e));
    }

    DirichletCharacter conj() const {
        std::vector<std::uint32_t> e(expo_.size());
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] = static_cast<std::uint32_t>((ords[i] - expo_[i]) % ords[i]);
        return DirichletCharacter(basis_, std::move(e));
    }

    DirichletCharacter power(std::uint64_t n) const {
        std::vector<std::uint32_t> e(expo_.size());
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] = static_cast<std::uint32_t>((static_cast<std::uint64_t>(expo_[i]) * (n % ords[i])) % ords[i]);
        return DirichletCharacter(basis_, std::move(e));
    }

    // Order of chi in the character group.
    std::uint64_t order() const {
        std::uint64_t ord = 1;
        const auto& ords = basis_->orders();
        for (std::size_t i = 0; i < expo_.size(); ++i) {
            if (expo_[i] == 0) continue;
            ord = std::lcm(ord, ords[i] / std::gcd<std::uint64_t>(ords[i], expo_[i]));
        }
        return ord;
    }

    // 0 if chi(-1) = 1, else 1.
    int parity() const {
        if (modulus() <= 2) return 0;
        return eval(static_cast<std::int64_t>(modulus()) - 1).real() > 0 ? 0 : 1;
    }

    // Smallest d | q such that chi is trivial on units a == 1 (mod d),
    // computed per prime-power component from the exponent vector.
    std::uint64_t conductor() const {
        std::uint64_t cond = 1;
        std::size_t idx = 0;
        for (const auto& c : basis_->components()) {
            const std::size_t ng = c.generators.size();
            if (c.prime != 2) {
                if (ng == 1) {
                    const std::uint64_t d = c.orders[0];
                    const std::uint64_t a = expo_[idx];
                    if (a != 0) {
                        const std::uint64_t m = d / std::gcd(d, a);
                        int alpha = 0;
                        std::uint64_t mm = m;
                        while (mm % c.prime == 0) { mm /= c.prime; ++alpha; }
                        std::uint64_t pf = c.prime;
                        for (int i = 0; i < alpha; ++i) pf *= c.prime;
                        cond *= pf;
                    }
                }
            } else {
                if (c.exponent == 2 && ng == 1) {
                    if (expo_[idx] != 0) cond *= 4;
                } else if (c.exponent >= 3) {
                    const std::uint64_t eps = expo_[idx];
                    const std::uint64_t a = expo_[idx + 1];
                    std::uint64_t c2 = 1;
                    if (eps != 0) c2 = 4;
                    if (a != 0) {
                        const std::uint64_t d = c.orders[1];
                        const std::uint64_t m = d / std::gcd(d, a);
                        int beta = 0;
                        std::uint64_t mm = m;
                        while (mm % 2 == 0) { mm /= 2; ++beta; }
                        std::uint64_t c5 = 1;
                        for (int i = 0; i < beta + 2; ++i) c5 *= 2;
                        c2 = std::max(c2, c5);
                    }
                    cond *= c2;
                }
            }
            idx += ng;
        }
        return cond;
    }

    bool is_primitive() const { return conductor() == modulus(); }

    // The character mod Q (q | Q) agreeing with chi on units of Q.
    DirichletCharacter induced_to(std::uint64_t Q) const {
        if (Q % modulus() != 0)
            throw std::domain_error("DirichletCharacter: induction target must be a multiple of the modulus");
        auto b = unit_basis(Q);
        std::vector<std::uint32_t> e;
        e.reserve(b->generator_count());
        std::size_t idx = 0;
        for (std::size_t ci = 0; ci < b->components().size(); ++ci) {
            const auto& c = b->components()[ci];
            for (std::size_t i = 0; i < c.generators.size(); ++i, ++idx) {
                // The CRT lift is a unit mod Q, hence mod q.
                const std::uint64_t g = b->generator_element(ci, i);
                const RootAngle ang = angle_at(static_cast<std::int64_t>(g));
                const std::uint64_t d = b->orders()[idx];
                const std::int64_t prod = ang.num * static_cast<std::int64_t>(d);
                if (prod % ang.den != 0)
                    throw std::logic_error("induced_to: non-integral exponent");
                e.push_back(static_cast<std::uint32_t>((prod / ang.den) % static_cast<std::int64_t>(d)));
            }
        }
        return DirichletCharacter(std::move(b), std::move(e));
    }

    // The primitive character inducing chi (modulus = conductor).
    DirichletCharacter primitivized() const {
        const std::uint64_t d = conductor();
        const std::uint64_t q = modulus();
        if (d == q) return *this;
        auto b = unit_basis(d);
        std::vector<std::uint32_t> e;
        e.reserve(b->generator_count());
        std::size_t idx = 0;
        for (std::size_t ci = 0; ci < b->components().size(); ++ci) {
            const auto& c = b->components()[ci];
            for (std::size_t i = 0; i < c.generators.size(); ++i, ++idx) {
                // Lift the group element mod d to a residue coprime to q.
                std::uint64_t h = b->generator_element(ci, i);
                while (std::gcd(h, q) != 1) h += d;
                const RootAngle ang = angle_at(static_cast<std::int64_t>(h));
                const std::uint64_t ord = b->orders()[idx];
                const std::int64_t prod = ang.num * static_cast<std::int64_t>(ord);
                if (prod % ang.den != 0)
                    throw std::logic_error("primitivized: non-integral exponent");
                e.push_back(static_cast<std::uint32_t>((prod / ang.den) % static_cast<std::int64_t>(ord)));
            }
        }
        return DirichletCharacter(std::move(b), std::move(e));
    }

    // Stable textual identity: dot-joined exponent vector ("-" for q <= 2).
    std::string label() const {
        if (expo_.empty()) return "-";
        std::string s;
        for (std::size_t i = 0; i < expo_.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(expo_[i]);
        }
        return s;
    }

    bool operator==(const DirichletCharacter& o) const {
        return modulus() == o.modulus() && expo_ == o.expo_;
    }

  private:
    DirichletCharacter(std::shared_ptr<const UnitGroupBasis> b, std::vector<std::uint32_t> e)
        : basis_(std::move(b)), expo_(std::move(e)) {}

    std::shared_ptr<const UnitGroupBasis> basis_;
    std::vector<std::uint32_t> expo_;
};

// Conductor by definition: smallest d | q with chi trivial on units == 1 mod d.
// Quadratic in q; kept as the oracle for the formulaic conductor().
inline std::uint64_t conductor_by_scan(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    for (std::uint64_t d : divisors_of(q)) {
        bool ok = true;
        for (std::uint64_t a = 1; a <= q && ok; a += d) {
            if (std::gcd(a, q) != 1) continue;
            const Complex v = chi.eval(static_cast<std::int64_t>(a));
            if (std::abs(v - Complex(1.0, 0.0)) > 1e-9) ok = false;
        }
        if (ok) return d;
    }
    return q;
}

// All characters mod q of conductor exactly f.
inline std::vector<DirichletCharacter> characters_of_conductor(std::uint64_t q, std::uint64_t f) {
    std::vector<DirichletCharacter> out;
    for (auto& chi : DirichletCharacter::enumerate_all(q))
        if (chi.conductor() == f) out.push_back(chi);
    return out;
}

inline std::vector<DirichletCharacter> primitive_characters(std::uint64_t q) {
    return characters_of_conductor(q, q);
}

}  // namespace charsums
