#pragma once

// The Poisson-dual character sum H_chi, its multiplicative Fourier transform
// H_hat, the original triple sum G they factor, the closed-form evaluations
// of H_hat by conductor class of psi, the CRT factorization twist, and the
// elementary treatment of g(chi, psi) for q = p^2.
//
// Conventions: chi is primitive mod q unless stated otherwise; in closed
// forms q = p^k and m1, m2, m3, r run over divisors of q^infinity. Modular
// inverses inside e_c(...) arguments are taken mod c at each call site.

#include <cstdint>
#include <optional>

#include "charsums/expsums.hpp"
#include "charsums/report.hpp"
#include "charsums/residues.hpp"

namespace charsums {

// ---------------------------------------------------------------------------
// H_chi(m1, m2, m3, r) =
//   sum_{u,t mod q} chi(t + m2 u) conj(chi)(r t + m1 m2) conj(chi)(u)
//                   chi(-m1 + r u) e_q(m3 t)
// ---------------------------------------------------------------------------

inline Complex h_sum(const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2, std::int64_t m3,
                     std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    const auto vals = chi.value_table();
    const auto e = exp_table(q);
    const std::uint64_t m2r = mod_reduce(m2, q), rr = mod_reduce(r, q);
    const std::uint64_t m12 = mod_reduce(m1 * m2, q), m3r = mod_reduce(m3, q);
    const std::uint64_t nm1 = mod_reduce(-m1, q);
    Complex s = 0.0;
    for (std::uint64_t u = 0; u < q; ++u) {
        const Complex wu = std::conj(vals[u]) * vals[(nm1 + rr * u) % q];
        if (wu == Complex(0.0, 0.0)) continue;
        const std::uint64_t tu = (m2r * u) % q;
        Complex inner = 0.0;
        for (std::uint64_t t = 0; t < q; ++t)
            inner += vals[(t + tu) % q] * std::conj(vals[(rr * t + m12) % q]) * e[(m3r * t) % q];
        s += wu * inner;
    }
    return s;
}

// ---------------------------------------------------------------------------
// G(m1, m2, m3; c) for c = q r
// ---------------------------------------------------------------------------

// Literal quadruple sum; the oracle, reserved for tiny c.
inline Complex g_triple_naive(const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2, std::int64_t m3,
                              std::uint64_t c) {
    const std::uint64_t q = chi.modulus();
    if (c % q != 0) throw std::domain_error("g_triple_naive: q must divide c");
    const auto vals = chi.value_table();
    const auto vals2 = (chi * chi).value_table();
    const auto e = exp_table(c);
    const std::uint64_t a1 = mod_reduce(m1, c), a2 = mod_reduce(m2, c), a3 = mod_reduce(m3, c);
    Complex s = 0.0;
    for (std::uint64_t y = 0; y < c; ++y) {
        if (std::gcd(y, c) != 1) continue;
        const Complex cy = vals2[y % q];
        if (cy == Complex(0.0, 0.0)) continue;
        const std::uint64_t ybar = mod_inverse(static_cast<std::int64_t>(y), c);
        for (std::uint64_t x1 = 0; x1 < c; ++x1) {
            const Complex c1 = vals[x1 % q];
            if (c1 == Complex(0.0, 0.0)) continue;
            const Complex f1 = c1 * cy * e[(a1 * x1 + x1 * y) % c];
            for (std::uint64_t x2 = 0; x2 < c; ++x2) {
                const Complex c2 = std::conj(vals[x2 % q]);
                if (c2 == Complex(0.0, 0.0)) continue;
                Complex inner = 0.0;
                for (std::uint64_t x3 = 0; x3 < c; ++x3) {
                    const Complex c3 = std::conj(vals[x3 % q]);
                    if (c3 == Complex(0.0, 0.0)) continue;
                    inner += c3 * e[(a3 * x3 + ((x2 * x3) % c) * ybar) % c];
                }
                s += f1 * c2 * e[(a2 * x2) % c] * inner;
            }
        }
    }
    const double c3 = static_cast<double>(c) * c * c;
    return s / c3;
}

// Collapsed double sum: the x1 and x2 sums are Gauss-sum evaluations, leaving
//   G = (r^2 tau(chi) tau(conj chi) / c^3)
//       sum_{y == -m1 (r), (y,c)=1} sum_{x3 == -m2 (r)}
//         conj(chi)(x3) chi(y) e_c(m3 y x3) conj(chi)((m1+y)/r) chi((m2+x3)/r).
inline Complex g_triple_reduced(const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2,
                                std::int64_t m3, std::uint64_t c) {
    const std::uint64_t q = chi.modulus();
    if (c % q != 0) throw std::domain_error("g_triple_reduced: q must divide c");
    const std::uint64_t r = c / q;
    const auto vals = chi.value_table();
    const auto e = exp_table(c);
    const Complex tau = gauss_sum(chi);
    const Complex tau_bar = gauss_sum(chi.conj());
    const std::uint64_t m3c = mod_reduce(m3, c);
    Complex s = 0.0;
    for (std::uint64_t u = 0; u < q; ++u) {
        const std::uint64_t y = mod_reduce(-m1 + static_cast<std::int64_t>(r * u), c);
        if (std::gcd(y, c) != 1) continue;
        const Complex wy = vals[y % q] * std::conj(vals[u]);
        if (wy == Complex(0.0, 0.0)) continue;
        for (std::uint64_t t = 0; t < q; ++t) {
            const std::uint64_t x3 = mod_reduce(-m2 + static_cast<std::int64_t>(r * t), c);
            const Complex wx = std::conj(vals[x3 % q]) * vals[t];
            if (wx == Complex(0.0, 0.0)) continue;
            s += wy * wx * e[(m3c * ((y * x3) % c)) % c];
        }
    }
    const double c3 = static_cast<double>(c) * c * c;
    return s * tau * tau_bar * (static_cast<double>(r) * r / c3);
}

// delta_{(m1,r)=1} H_chi(m1,m2,m3,r) = c q G(m1,m2,m3;c) e_c(-m1 m2 m3) chi(-1),
// both sides computed independently (H by its double sum, G by the collapsed
// path, or the naive quadruple sum when use_naive_G is set).
inline SumReport verify_gh_relation(const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2,
                                    std::int64_t m3, std::uint64_t r, bool use_naive_G = false) {
    const std::uint64_t q = chi.modulus();
    const std::uint64_t c = q * r;
    const bool coprime = std::gcd(mod_reduce(m1, r), r) == 1;
    const Complex lhs = coprime ? h_sum(chi, m1, m2, m3, static_cast<std::int64_t>(r)) : Complex(0.0, 0.0);

    const Complex G = use_naive_G ? g_triple_naive(chi, m1, m2, m3, c) : g_triple_reduced(chi, m1, m2, m3, c);
    const double theta = -kTwoPi * static_cast<double>(mod_reduce(m1 * m2 * m3, c)) / static_cast<double>(c);
    const Complex phase(std::cos(theta), std::sin(theta));
    const Complex sign = chi.parity() == 0 ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
    const Complex rhs = static_cast<double>(c) * static_cast<double>(q) * G * phase * sign;

    const double terms = 4.0 * static_cast<double>(q) * q + 2.0 * static_cast<double>(c) +
                         (use_naive_G ? static_cast<double>(c) * c : 0.0);
    return make_report("gh_relation",
                       {{"q", static_cast<std::int64_t>(q)},
                        {"chi", chi.label()},
                        {"m1", m1},
                        {"m2", m2},
                        {"m3", m3},
                        {"r", static_cast<std::int64_t>(r)}},
                       lhs, rhs, sum_tolerance(terms));
}

// ---------------------------------------------------------------------------
// H_hat(psi, chi, m1, m2, m3, r) =
//   sum_{t,u,v mod q} chi(t+m2 u) conj(chi)(r t + m1 m2) conj(chi)(u)
//                     chi(-m1 + r u) e_q(m3 v t) conj(psi)(v)
// ---------------------------------------------------------------------------

inline Complex h_hat_naive(const DirichletCharacter& psi, const DirichletCharacter& chi, std::int64_t m1,
                           std::int64_t m2, std::int64_t m3, std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    if (psi.modulus() != q) throw std::domain_error("h_hat_naive: psi and chi must share a modulus");
    const auto vals = chi.value_table();
    const auto pv = psi.value_table();
    const auto e = exp_table(q);
    const std::uint64_t m2r = mod_reduce(m2, q), rr = mod_reduce(r, q);
    const std::uint64_t m12 = mod_reduce(m1 * m2, q), m3r = mod_reduce(m3, q);
    const std::uint64_t nm1 = mod_reduce(-m1, q);
    Complex s = 0.0;
    for (std::uint64_t u = 0; u < q; ++u) {
        const Complex wu = std::conj(vals[u]) * vals[(nm1 + rr * u) % q];
        if (wu == Complex(0.0, 0.0)) continue;
        for (std::uint64_t t = 0; t < q; ++t) {
            const Complex wt = vals[(t + m2r * u) % q] * std::conj(vals[(rr * t + m12) % q]);
            if (wt == Complex(0.0, 0.0)) continue;
            Complex inner = 0.0;
            for (std::uint64_t v = 0; v < q; ++v) inner += e[(m3r * t % q) * v % q] * std::conj(pv[v]);
            s += wu * wt * inner;
        }
    }
    return s;
}

// The v-sum depends only on n = m3 t mod q; precomputing
// T[n] = sum_v e_q(n v) conj(psi)(v) collapses H_hat to a double sum.
struct HhatKernel {
    DirichletCharacter psi;
    std::vector<Complex> T;
};

inline HhatKernel make_hhat_kernel(const DirichletCharacter& psi) {
    const std::uint64_t q = psi.modulus();
    const auto pv = psi.value_table();
    const auto e = exp_table(q);
    HhatKernel k{psi, std::vector<Complex>(q, Complex(0.0, 0.0))};
    for (std::uint64_t n = 0; n < q; ++n) {
        Complex s = 0.0;
        for (std::uint64_t v = 0; v < q; ++v) {
            if (pv[v] == Complex(0.0, 0.0)) continue;
            s += e[(n * v) % q] * std::conj(pv[v]);
        }
        k.T[n] = s;
    }
    return k;
}

inline Complex h_hat_with_kernel(const HhatKernel& kernel, const DirichletCharacter& chi, std::int64_t m1,
                                 std::int64_t m2, std::int64_t m3, std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    if (kernel.psi.modulus() != q) throw std::domain_error("h_hat: psi and chi must share a modulus");
    const auto vals = chi.value_table();
    const std::uint64_t m2r = mod_reduce(m2, q), rr = mod_reduce(r, q);
    const std::uint64_t m12 = mod_reduce(m1 * m2, q), m3r = mod_reduce(m3, q);
    const std::uint64_t nm1 = mod_reduce(-m1, q);
    Complex s = 0.0;
    for (std::uint64_t u = 0; u < q; ++u) {
        const Complex wu = std::conj(vals[u]) * vals[(nm1 + rr * u) % q];
        if (wu == Complex(0.0, 0.0)) continue;
        const std::uint64_t tu = (m2r * u) % q;
        Complex inner = 0.0;
        for (std::uint64_t t = 0; t < q; ++t) {
            const Complex wt = vals[(t + tu) % q] * std::conj(vals[(rr * t + m12) % q]);
            if (wt == Complex(0.0, 0.0)) continue;
            inner += wt * kernel.T[(m3r * t) % q];
        }
        s += wu * inner;
    }
    return s;
}

inline Complex h_hat(const DirichletCharacter& psi, const DirichletCharacter& chi, std::int64_t m1,
                     std::int64_t m2, std::int64_t m3, std::int64_t r) {
    return h_hat_with_kernel(make_hhat_kernel(psi), chi, m1, m2, m3, r);
}

// Fourier inversion: (1/phi(q)) sum_psi H_hat(psi) psi(w) = H_chi(m1,m2,m3 w,r)
// for every unit w. H_hat goes through the kernel path, H_chi through its own
// double sum, so the two routes share no intermediate values. Returns the
// worst unit w as a report.
inline SumReport verify_fourier_inversion(const std::vector<HhatKernel>& kernels,
                                          const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2,
                                          std::int64_t m3, std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    const double phi = static_cast<double>(euler_phi(q));
    std::vector<Complex> hat(kernels.size());
    for (std::size_t i = 0; i < kernels.size(); ++i)
        hat[i] = h_hat_with_kernel(kernels[i], chi, m1, m2, m3, r);

    double worst = -1.0;
    Complex worst_lhs = 0.0, worst_rhs = 0.0;
    std::uint64_t worst_w = 1;
    for (std::uint64_t w = 0; w < q; ++w) {
        if (std::gcd(w, q) != 1) continue;
        Complex lhs = 0.0;
        for (std::size_t i = 0; i < kernels.size(); ++i)
            lhs += hat[i] * kernels[i].psi.eval(static_cast<std::int64_t>(w));
        lhs /= phi;
        const Complex rhs = h_sum(chi, m1, m2, m3 * static_cast<std::int64_t>(w), r);
        const double res = std::abs(lhs - rhs);
        if (res > worst) {
            worst = res;
            worst_lhs = lhs;
            worst_rhs = rhs;
            worst_w = w;
        }
    }
    // Each H_hat is a q^2-term sum with kernel terms of size up to q.
    const double tol = sum_tolerance(2.0 * q * q, static_cast<double>(q)) + sum_tolerance(q * q);
    return make_report("fourier_inversion",
                       {{"q", static_cast<std::int64_t>(q)},
                        {"chi", chi.label()},
                        {"m1", m1},
                        {"m2", m2},
                        {"m3", m3},
                        {"r", static_cast<std::int64_t>(r)},
                        {"w", static_cast<std::int64_t>(worst_w)}},
                       worst_lhs, worst_rhs, tol);
}

// ---------------------------------------------------------------------------
// Closed forms for H_hat, q = p^k, m1 m2 m3 r | q^infinity, (m1, r) = 1
// ---------------------------------------------------------------------------

enum class HhatCase {
    psi_primitive,         // tau(conj psi) g(chi, psi)
    psi_primitive_vanish,  // some argument shares a factor with q
    psi_trivial,           // Ramanujan-sum formula
    inter_unit_vanish,     // (m1 m2 m3 r, p) = 1
    inter_r,               // r = p^{k-j}, m = (1,1,1)
    inter_r_vanish,        // p | r but r != p^{k-j}
    inter_m,               // m = (p^{k-j}, p^{k-j}, p^{k-j}), r = 1
    inter_m_vanish,        // p | m1 m2 m3 in any other pattern
    inter_both_vanish,     // p | r and p | m1 m2 m3
};

struct HhatClosedForm {
    Complex value{0.0, 0.0};
    HhatCase kind = HhatCase::psi_trivial;
    // Magnitude bound from the conductor-class analysis (recorded, not an
    // exact value) for the nonzero intermediate cases.
    double bound = 0.0;
};

namespace detail {
inline std::uint64_t pure_power_or_throw(std::int64_t m, std::uint64_t p, const char* what) {
    if (m <= 0) throw std::domain_error(std::string(what) + ": argument must be a positive q^infinity divisor");
    std::uint64_t v = static_cast<std::uint64_t>(m);
    while (v % p == 0) v /= p;
    if (v != 1) throw std::domain_error(std::string(what) + ": argument is not supported on p");
    return static_cast<std::uint64_t>(m);
}
}  // namespace detail

inline HhatClosedForm h_hat_closed_form(const DirichletCharacter& psi, const DirichletCharacter& chi,
                                        std::int64_t m1, std::int64_t m2, std::int64_t m3, std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    const auto fq = factorize(q);
    if (fq.factors.size() != 1) throw std::domain_error("h_hat_closed_form: q must be a prime power");
    if (!chi.is_primitive()) throw std::domain_error("h_hat_closed_form: chi must be primitive");
    if (psi.modulus() != q) throw std::domain_error("h_hat_closed_form: psi must live mod q");
    const std::uint64_t p = fq.factors[0].first;
    const int k = fq.factors[0].second;
    detail::pure_power_or_throw(m1, p, "h_hat_closed_form(m1)");
    detail::pure_power_or_throw(m2, p, "h_hat_closed_form(m2)");
    detail::pure_power_or_throw(m3, p, "h_hat_closed_form(m3)");
    detail::pure_power_or_throw(r, p, "h_hat_closed_form(r)");
    if (std::gcd(static_cast<std::uint64_t>(m1), static_cast<std::uint64_t>(r)) != 1)
        throw std::domain_error("h_hat_closed_form: (m1, r) = 1 required");

    const std::uint64_t cond = psi.conductor();
    int j = 0;
    for (std::uint64_t c = cond; c % p == 0; c /= p) ++j;

    HhatClosedForm out;
    if (j == k) {
        if (m1 == 1 && m2 == 1 && m3 == 1 && r == 1) {
            out.kind = HhatCase::psi_primitive;
            out.value = gauss_sum(psi.conj()) * g_sum(chi, psi);
            out.bound = std::pow(static_cast<double>(q), 0.5) * 2.0 * static_cast<double>(q);
        } else {
            out.kind = HhatCase::psi_primitive_vanish;
        }
        return out;
    }
    if (j == 0) {
        out.kind = HhatCase::psi_trivial;
        const double R1 = static_cast<double>(ramanujan_sum(q, m1));
        const double R2 = static_cast<double>(ramanujan_sum(q, m2));
        const double R3 = static_cast<double>(ramanujan_sum(q, m3));
        const double Rr = static_cast<double>(ramanujan_sum(q, r));
        const double chi0_r = (std::gcd(mod_reduce(r, q), q) == 1) ? 1.0 : 0.0;
        const double chi0_m = (std::gcd(mod_reduce(m1 * m2 * m3, q), q) == 1) ? 1.0 : 0.0;
        const double sign = chi.parity() == 0 ? 1.0 : -1.0;
        out.value = Complex(chi0_r * R1 * R2 * R3 + static_cast<double>(q) * Rr * sign * chi0_m, 0.0);
        out.bound = std::abs(out.value);
        return out;
    }

    // Intermediate conductor p^j, 1 <= j < k.
    const bool p_div_r = (r % static_cast<std::int64_t>(p) == 0);
    const bool p_div_m = (m1 % static_cast<std::int64_t>(p) == 0) || (m2 % static_cast<std::int64_t>(p) == 0) ||
                         (m3 % static_cast<std::int64_t>(p) == 0);
    std::uint64_t shift = 1;  // p^{k-j}
    for (int i = 0; i < k - j; ++i) shift *= p;

    if (!p_div_r && !p_div_m) {
        out.kind = HhatCase::inter_unit_vanish;
        return out;
    }
    if (p_div_r && p_div_m) {
        out.kind = HhatCase::inter_both_vanish;
        return out;
    }
    const Complex tau_psi_bar = gauss_sum(psi.primitivized().conj());
    if (p_div_r) {
        if (static_cast<std::uint64_t>(r) != shift) {
            out.kind = HhatCase::inter_r_vanish;
            return out;
        }
        out.kind = HhatCase::inter_r;
        const Complex sign = chi.parity() == 0 ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
        const double pw = static_cast<double>(shift) * static_cast<double>(shift);
        out.value = pw * tau_psi_bar * sign * intermediate_sum(chi, psi);
        // O(p^{2k - j/2}) shape.
        out.bound = std::pow(static_cast<double>(p), 2.0 * k - 0.5 * j);
        return out;
    }
    // p | m1 m2 m3, r = 1: vanishes unless every m_i equals p^{k-j}.
    if (!(static_cast<std::uint64_t>(m1) == shift && static_cast<std::uint64_t>(m2) == shift &&
          static_cast<std::uint64_t>(m3) == shift)) {
        out.kind = HhatCase::inter_m_vanish;
        return out;
    }
    out.kind = HhatCase::inter_m;
    const double pw = static_cast<double>(shift) * static_cast<double>(shift) * static_cast<double>(shift);
    out.value = pw * tau_psi_bar * intermediate_sum(chi, psi.conj());
    out.bound = std::pow(static_cast<double>(p), 3.0 * k - 1.5 * j);
    return out;
}

inline SumReport verify_closed_form(const HhatKernel& kernel, const DirichletCharacter& chi, std::int64_t m1,
                                    std::int64_t m2, std::int64_t m3, std::int64_t r) {
    const std::uint64_t q = chi.modulus();
    const auto cf = h_hat_closed_form(kernel.psi, chi, m1, m2, m3, r);
    const Complex brute = h_hat_with_kernel(kernel, chi, m1, m2, m3, r);
    return make_report("hhat_closed_form",
                       {{"q", static_cast<std::int64_t>(q)},
                        {"chi", chi.label()},
                        {"psi", kernel.psi.label()},
                        {"m1", m1},
                        {"m2", m2},
                        {"m3", m3},
                        {"r", static_cast<std::int64_t>(r)},
                        {"case", std::string(cf.kind == HhatCase::psi_primitive          ? "psi_primitive"
                                             : cf.kind == HhatCase::psi_primitive_vanish ? "psi_primitive_vanish"
                                             : cf.kind == HhatCase::psi_trivial          ? "psi_trivial"
                                             : cf.kind == HhatCase::inter_unit_vanish    ? "inter_unit_vanish"
                                             : cf.kind == HhatCase::inter_r              ? "inter_r"
                                             : cf.kind == HhatCase::inter_r_vanish       ? "inter_r_vanish"
                                             : cf.kind == HhatCase::inter_m              ? "inter_m"
                                             : cf.kind == HhatCase::inter_m_vanish       ? "inter_m_vanish"
                                                                                         : "inter_both_vanish")}},
                       cf.value, brute, sum_tolerance(2.0 * q * q, static_cast<double>(q)));
}

// ---------------------------------------------------------------------------
// CRT factorization with the epsilon twist
// ---------------------------------------------------------------------------

inline std::uint64_t crt_combine(std::uint64_t a1, std::uint64_t q1, std::uint64_t a2, std::uint64_t q2) {
    // x == a1 mod q1, x == a2 mod q2, (q1, q2) = 1.
    const std::uint64_t inv = mod_inverse(static_cast<std::int64_t>(q1 % q2), q2);
    const std::uint64_t t = mod_mul(mod_reduce(static_cast<std::int64_t>(a2) - static_cast<std::int64_t>(a1 % q2), q2), inv, q2);
    return (a1 + q1 * t) % (q1 * q2);
}

// The character mod q1 obtained from chi mod q1*q2 by restricting to residues
// that are 1 mod q2.
inline DirichletCharacter char_component(const DirichletCharacter& chi, std::uint64_t q1) {
    const std::uint64_t q = chi.modulus();
    if (q % q1 != 0 || std::gcd(q1, q / q1) != 1)
        throw std::domain_error("char_component: q1 must be a unitary divisor of the modulus");
    const std::uint64_t q2 = q / q1;
    auto b = unit_basis(q1);
    std::vector<std::uint32_t> e;
    std::size_t idx = 0;
    for (std::size_t ci = 0; ci < b->components().size(); ++ci) {
        const auto& comp = b->components()[ci];
        for (std::size_t i = 0; i < comp.generators.size(); ++i, ++idx) {
            const std::uint64_t g1 = b->generator_element(ci, i);
            const std::uint64_t x = (q2 == 1) ? g1 : crt_combine(g1, q1, 1, q2);
            const RootAngle ang = chi.angle_at(static_cast<std::int64_t>(x));
            const std::uint64_t d = b->orders()[idx];
            const std::int64_t prod = ang.num * static_cast<std::int64_t>(d);
            if (prod % ang.den != 0) throw std::logic_error("char_component: non-integral exponent");
            e.push_back(static_cast<std::uint32_t>((prod / ang.den) % static_cast<std::int64_t>(d)));
        }
    }
    return DirichletCharacter::from_exponents(q1, std::move(e));
}

// H_hat(psi, chi, a, b, c, d) = eps * H_hat(psi1, chi1, a1, b1, c1, d1)
//                                   * H_hat(psi2, chi2, a2, b2, c2, d2)
// with eps = psi1(a2 b2 c2 (q2 d2)^{-1}) psi2(a1 b1 c1 (q1 d1)^{-1}); every
// factor is brute-forced independently.
inline SumReport verify_crt_twist(std::uint64_t q1, std::uint64_t q2, const DirichletCharacter& chi,
                                  const DirichletCharacter& psi, std::int64_t a, std::int64_t b, std::int64_t c,
                                  std::int64_t d) {
    if (std::gcd(q1, q2) != 1) throw std::domain_error("verify_crt_twist: factors must be coprime");
    const std::uint64_t q = q1 * q2;
    if (chi.modulus() != q || psi.modulus() != q)
        throw std::domain_error("verify_crt_twist: characters must live mod q1*q2");

    const Complex lhs = h_hat(psi, chi, a, b, c, d);

    const auto chi1 = char_component(chi, q1);
    const auto chi2 = char_component(chi, q2);
    const auto psi1 = char_component(psi, q1);
    const auto psi2 = char_component(psi, q2);

    const auto part = [](std::int64_t n, std::uint64_t m) {
        return static_cast<std::int64_t>(split_q_part(static_cast<std::uint64_t>(n), m).first);
    };
    const std::int64_t a1 = part(a, q1), a2 = part(a, q2);
    const std::int64_t b1 = part(b, q1), b2 = part(b, q2);
    const std::int64_t c1 = part(c, q1), c2 = part(c, q2);
    const std::int64_t d1 = part(d, q1), d2 = part(d, q2);

    Complex eps(1.0, 0.0);
    if (q1 > 1) {
        const std::uint64_t num = mod_reduce(a2 * b2 % static_cast<std::int64_t>(q1) * c2, q1);
        const std::uint64_t den = mod_inverse(static_cast<std::int64_t>(mod_reduce(static_cast<std::int64_t>(q2) * d2, q1)), q1);
        eps *= psi1.eval(static_cast<std::int64_t>(mod_mul(num, den, q1)));
    }
    if (q2 > 1) {
        const std::uint64_t num = mod_reduce(a1 * b1 % static_cast<std::int64_t>(q2) * c1, q2);
        const std::uint64_t den = mod_inverse(static_cast<std::int64_t>(mod_reduce(static_cast<std::int64_t>(q1) * d1, q2)), q2);
        eps *= psi2.eval(static_cast<std::int64_t>(mod_mul(num, den, q2)));
    }

    const Complex rhs = eps * h_hat(psi1, chi1, a1, b1, c1, d1) * h_hat(psi2, chi2, a2, b2, c2, d2);
    const double scale = sum_tolerance(4.0 * q * q, static_cast<double>(q)) *
                         std::max(1.0, static_cast<double>(q1) * q1 + static_cast<double>(q2) * q2);
    return make_report("crt_twist",
                       {{"q", static_cast<std::int64_t>(q)},
                        {"q1", static_cast<std::int64_t>(q1)},
                        {"chi", chi.label()},
                        {"psi", psi.label()},
                        {"m1", a},
                        {"m2", b},
                        {"m3", c},
                        {"r", d}},
                       lhs, rhs, scale);
}

// ---------------------------------------------------------------------------
// q = p^2 elementary machinery
// ---------------------------------------------------------------------------

struct EllInvariant {
    std::uint64_t p = 0;
    std::uint64_t ell = 0;  // chi(1 + p t) = e_p(ell t); unit iff conductor p^2
};

inline EllInvariant ell_of_char(const DirichletCharacter& chi) {
    const auto f = factorize(chi.modulus());
    if (f.factors.size() != 1 || f.factors[0].second != 2 || f.factors[0].first == 2)
        throw std::domain_error("ell_of_char: modulus must be p^2 for an odd prime p");
    const std::uint64_t p = f.factors[0].first;
    const RootAngle ang = chi.angle_at(static_cast<std::int64_t>(1 + p));
    // chi(1+p) is a p-th root of unity.
    const std::int64_t prod = ang.num * static_cast<std::int64_t>(p);
    if (ang.zero || prod % ang.den != 0) throw std::logic_error("ell_of_char: unexpected angle");
    return EllInvariant{p, static_cast<std::uint64_t>((prod / ang.den) % static_cast<std::int64_t>(p))};
}

// g(chi, psi) for q = p^2 via the additive-character collapse: the (b, d)
// sums force two congruences whose solutions (a, c = -2-a) satisfy a monic
// quadratic, so g = p^2 times a sum over at most 2 residues.
inline Complex g_sum_psquared(const DirichletCharacter& chi, const DirichletCharacter& psi) {
    if (!chi.is_primitive()) throw std::domain_error("g_sum_psquared: chi must be primitive");
    const auto lc = ell_of_char(chi);
    if (psi.modulus() != chi.modulus()) throw std::domain_error("g_sum_psquared: moduli must match");
    const auto lp = ell_of_char(psi);
    const std::uint64_t p = lc.p, q = p * p;
    if (lp.ell == 0) return Complex(0.0, 0.0);  // psi imprimitive
    if (std::gcd(lc.ell, p) != 1) throw std::logic_error("g_sum_psquared: primitive chi must have unit ell");

    const std::uint64_t A = mod_mul(lc.ell, mod_inverse(static_cast<std::int64_t>(lp.ell), p), p);
    const auto cvals = chi.value_table();
    const auto pvals = psi.value_table();
    Complex s = 0.0;
    for (std::uint64_t a = 0; a < p; ++a) {
        // a(a+2) == -A(a+1) mod p
        if ((a * (a + 2) + A * (a + 1)) % p != 0) continue;
        const std::uint64_t c = mod_reduce(-2 - static_cast<std::int64_t>(a), p);
        if (a % p == 0 || (a + 1) % p == 0 || c % p == 0 || (c + 1) % p == 0) continue;
        const std::uint64_t ac1 = mod_reduce(static_cast<std::int64_t>(a * c) - 1, q);
        if (ac1 % p == 0) continue;
        // The two collapse congruences must hold at any surviving root.
        const auto inv = [&](std::uint64_t x) { return mod_inverse(static_cast<std::int64_t>(x % p), p); };
        const std::uint64_t lhs1 = mod_reduce(static_cast<std::int64_t>(mod_mul(lc.ell, mod_reduce(static_cast<std::int64_t>(inv(a)) - static_cast<std::int64_t>(inv(a + 1)), p), p)), p);
        const std::uint64_t rhs1 = mod_reduce(-static_cast<std::int64_t>(mod_mul(mod_mul(lp.ell, c % p, p), inv(ac1), p)), p);
        const std::uint64_t lhs2 = mod_mul(lc.ell, mod_reduce(static_cast<std::int64_t>(inv(c)) - static_cast<std::int64_t>(inv(c + 1)), p), p);
        const std::uint64_t rhs2 = mod_mul(mod_mul(lp.ell, a % p, p), inv(ac1), p);
        if (lhs1 != rhs1 || lhs2 != rhs2) throw std::logic_error("g_sum_psquared: congruence check failed");

        s += cvals[a % q] * std::conj(cvals[(a + 1) % q]) * std::conj(cvals[c % q]) * cvals[(c + 1) % q] *
             pvals[ac1];
    }
    return static_cast<double>(q) * s;
}

// |H_chi(m1, m2, m3, r)| <= kappa * q^{-1} (m1,q)(m2,q)(m3,q) d(q)^3 when
// some m_j = 0, with (0, q) read as q. kappa is an empirically recorded
// constant, not a proved one.
inline SumReport h_zero_bound(const DirichletCharacter& chi, std::int64_t m1, std::int64_t m2, std::int64_t m3,
                              std::int64_t r, double kappa) {
    if (m1 != 0 && m2 != 0 && m3 != 0)
        throw std::invalid_argument("h_zero_bound: requires m1 m2 m3 = 0");
    const std::uint64_t q = chi.modulus();
    const double H = std::abs(h_sum(chi, m1, m2, m3, r));
    const double dq = static_cast<double>(divisor_count(q));
    const double bound = kappa / static_cast<double>(q) * static_cast<double>(gcd_u(m1, q)) *
                         static_cast<double>(gcd_u(m2, q)) * static_cast<double>(gcd_u(m3, q)) * dq * dq * dq;
    return make_bound_report("h_zero_bound",
                             {{"q", static_cast<std::int64_t>(q)},
                              {"chi", chi.label()},
                              {"m1", m1},
                              {"m2", m2},
                              {"m3", m3},
                              {"r", r},
                              {"ratio", bound > 0 ? H / bound * kappa : 0.0}},
                             H, bound, 1e-9);
}

}  // namespace charsums
