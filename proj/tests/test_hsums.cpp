#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "charsums/hsums.hpp"

using namespace charsums;

TEST_CASE("h_sum: frozen q=5 values") {
    auto quad5 = DirichletCharacter::from_exponents(5, {2});
    auto chi_i = DirichletCharacter::from_exponents(5, {1});
    // Independent Python brute force over the double sum.
    REQUIRE(std::abs(h_sum(quad5, 1, 1, 1, 1) - Complex(-4.854101966249685, -1.9021130325903064)) < 1e-10);
    REQUIRE(std::abs(h_sum(chi_i, 1, 1, 1, 1) - Complex(0.9999999999999997, -2.3511410091698925)) < 1e-10);
}

TEST_CASE("h_sum symmetries on a grid up to q=25") {
    std::mt19937_64 rng(101);
    for (std::uint64_t q : {5u, 7u, 9u, 15u, 25u}) {
        for (auto& chi : primitive_characters(q)) {
            if (chi.label() != primitive_characters(q).front().label() && q > 9) continue;
            for (int trial = 0; trial < 25; ++trial) {
                const std::int64_t m1 = static_cast<std::int64_t>(rng() % (2 * q)) - static_cast<std::int64_t>(q) + 1;
                const std::int64_t m2 = static_cast<std::int64_t>(rng() % (2 * q)) - static_cast<std::int64_t>(q) + 1;
                const std::int64_t m3 = static_cast<std::int64_t>(rng() % (2 * q)) - static_cast<std::int64_t>(q) + 1;
                const std::int64_t r = 1 + static_cast<std::int64_t>(rng() % 6);
                const double tol = sum_tolerance(2.0 * q * q);
                // m2 <-> m3 swap.
                REQUIRE(std::abs(h_sum(chi, m1, m2, m3, r) - h_sum(chi, m1, m3, m2, r)) < tol);
                // (q, r) = 1 swaps m1 <-> m2 with chi conjugated.
                if (std::gcd(mod_reduce(r, q), q) == 1) {
                    REQUIRE(std::abs(h_sum(chi, m1, m2, m3, r) - h_sum(chi.conj(), m2, m1, m3, r)) < tol);
                }
            }
        }
    }
}

TEST_CASE("G: naive and collapsed paths agree for small c") {
    std::mt19937_64 rng(7);
    for (std::uint64_t q : {5u, 7u, 9u, 15u}) {
        auto chi = primitive_characters(q).front();
        for (std::uint64_t r : {1u, 2u, 3u}) {
            const std::uint64_t c = q * r;
            if (c > 45) continue;
            for (int trial = 0; trial < 4; ++trial) {
                const std::int64_t m1 = static_cast<std::int64_t>(rng() % c) + 1;
                const std::int64_t m2 = static_cast<std::int64_t>(rng() % c) + 1;
                const std::int64_t m3 = static_cast<std::int64_t>(rng() % c) + 1;
                const Complex gn = g_triple_naive(chi, m1, m2, m3, c);
                const Complex gr = g_triple_reduced(chi, m1, m2, m3, c);
                REQUIRE(std::abs(gn - gr) < sum_tolerance(static_cast<double>(c) * c));
            }
        }
    }
}

TEST_CASE("G symmetry in m2 <-> m3 and vanishing off (m1, r) = 1") {
    auto chi = primitive_characters(5).front();
    const std::uint64_t c = 15;
    REQUIRE(std::abs(g_triple_naive(chi, 2, 3, 7, c) - g_triple_naive(chi, 2, 7, 3, c)) < 1e-9);
    // (m1, r) = (3, 3) > 1 forces G = 0.
    REQUIRE(std::abs(g_triple_naive(chi, 3, 1, 1, c)) < 1e-9);
    REQUIRE(std::abs(g_triple_reduced(chi, 3, 1, 1, c)) < 1e-9);
    REQUIRE_THROWS_AS(g_triple_naive(chi, 1, 1, 1, 12), std::domain_error);
}

TEST_CASE("GH relation on random tuples, both coprimality branches") {
    std::mt19937_64 rng(42);
    for (std::uint64_t q : {5u, 7u, 9u, 15u}) {
        for (auto& chi : primitive_characters(q)) {
            for (std::uint64_t r : {1u, 2u, 3u, 5u}) {
                for (int trial = 0; trial < 8; ++trial) {
                    const std::int64_t m1 = static_cast<std::int64_t>(rng() % (q * q)) - static_cast<std::int64_t>(q);
                    const std::int64_t m2 = static_cast<std::int64_t>(rng() % (q * q)) - static_cast<std::int64_t>(q);
                    const std::int64_t m3 = static_cast<std::int64_t>(rng() % (q * q)) - static_cast<std::int64_t>(q);
                    auto rep = verify_gh_relation(chi, m1, m2, m3, r);
                    INFO(to_json_line(rep));
                    REQUIRE(rep.pass);
                }
            }
            // r sharing the q-part (r in q^infinity divisors).
            auto rep = verify_gh_relation(chi, 1, 2, 3, q);
            REQUIRE(rep.pass);
        }
    }
}

TEST_CASE("GH relation against the naive G oracle at tiny c") {
    auto chi5 = primitive_characters(5).front();
    REQUIRE(verify_gh_relation(chi5, 1, 1, 1, 1, true).pass);
    REQUIRE(verify_gh_relation(chi5, 5, 1, 1, 5, true).pass);  // gcd(m1, r) > 1, both sides 0
    REQUIRE(verify_gh_relation(chi5, 2, 4, 3, 3, true).pass);
    auto chi9 = primitive_characters(9).front();
    REQUIRE(verify_gh_relation(chi9, 1, 2, 3, 2, true).pass);
    auto chi7 = primitive_characters(7).front();
    REQUIRE(verify_gh_relation(chi7, 3, 2, 5, 5, true).pass);
}

TEST_CASE("h_hat: kernel path matches the naive triple sum") {
    std::mt19937_64 rng(23);
    for (std::uint64_t q : {5u, 9u, 15u}) {
        auto chi = primitive_characters(q).front();
        for (auto& psi : DirichletCharacter::enumerate_all(q)) {
            const auto kernel = make_hhat_kernel(psi);
            for (int trial = 0; trial < 3; ++trial) {
                const std::int64_t m1 = static_cast<std::int64_t>(rng() % q) + 1;
                const std::int64_t m2 = static_cast<std::int64_t>(rng() % q) + 1;
                const std::int64_t m3 = static_cast<std::int64_t>(rng() % q) + 1;
                const std::int64_t r = static_cast<std::int64_t>(rng() % 4) + 1;
                const Complex a = h_hat_with_kernel(kernel, chi, m1, m2, m3, r);
                const Complex b = h_hat_naive(psi, chi, m1, m2, m3, r);
                REQUIRE(std::abs(a - b) < sum_tolerance(2.0 * q * q, static_cast<double>(q)));
            }
        }
    }
}

TEST_CASE("h_hat symmetries") {
    for (std::uint64_t q : {5u, 9u, 15u}) {
        auto chi = primitive_characters(q).front();
        for (auto& psi : DirichletCharacter::enumerate_all(q)) {
            const double tol = sum_tolerance(2.0 * q * q, static_cast<double>(q));
            REQUIRE(std::abs(h_hat(psi, chi, 1, 2, 3, 2) - h_hat(psi, chi, 1, 3, 2, 2)) < tol);
            // (q, r) = 1: swapping m1 <-> m2 conjugates chi.
            REQUIRE(std::abs(h_hat(psi, chi, 2, 1, 3, 2) - h_hat(psi, chi.conj(), 1, 2, 3, 2)) < tol);
        }
    }
}

TEST_CASE("h_hat closed form: psi primitive gives tau(conj psi) g(chi, psi)") {
    for (std::uint64_t q : {5u, 9u, 25u}) {
        auto chi = primitive_characters(q).front();
        for (auto& psi : primitive_characters(q)) {
            const auto kernel = make_hhat_kernel(psi);
            const auto cf = h_hat_closed_form(psi, chi, 1, 1, 1, 1);
            REQUIRE(cf.kind == HhatCase::psi_primitive);
            const Complex expect = gauss_sum(psi.conj()) * g_sum(chi, psi);
            REQUIRE(std::abs(cf.value - expect) < 1e-9);
            REQUIRE(verify_closed_form(kernel, chi, 1, 1, 1, 1).pass);
            // Vanishing off unit arguments.
            const std::int64_t p = static_cast<std::int64_t>(factorize(q).factors[0].first);
            REQUIRE(verify_closed_form(kernel, chi, p, 1, 1, 1).pass);
            REQUIRE(verify_closed_form(kernel, chi, 1, p, p, 1).pass);
            REQUIRE(verify_closed_form(kernel, chi, 1, 1, 1, p).pass);
        }
    }
}

TEST_CASE("h_hat closed form: trivial psi Ramanujan formula, full small grid") {
    for (std::uint64_t q : {5u, 9u, 27u}) {
        const std::int64_t p = static_cast<std::int64_t>(factorize(q).factors[0].first);
        const auto kernel = make_hhat_kernel(DirichletCharacter::principal(q));
        for (auto& chi : primitive_characters(q)) {
            std::vector<std::int64_t> powers{1};
            while (powers.back() < static_cast<std::int64_t>(q * q)) powers.push_back(powers.back() * p);
            for (auto m1 : powers)
                for (auto m2 : powers)
                    for (auto m3 : powers)
                        for (auto r : powers) {
                            if (std::gcd(m1, r) != 1) continue;
                            auto rep = verify_closed_form(kernel, chi, m1, m2, m3, r);
                            INFO(to_json_line(rep));
                            REQUIRE(rep.pass);
                        }
        }
    }
}

TEST_CASE("h_hat closed form: intermediate conductor vanishing and values, q=9 and q=27") {
    for (std::uint64_t q : {9u, 27u}) {
        const std::int64_t p = static_cast<std::int64_t>(factorize(q).factors[0].first);
        for (auto& chi : primitive_characters(q)) {
            if (chi.label() != primitive_characters(q).front().label() && q == 27) continue;
            for (auto& psi : DirichletCharacter::enumerate_all(q)) {
                const std::uint64_t cond = psi.conductor();
                if (cond == 1 || cond == q) continue;
                const auto kernel = make_hhat_kernel(psi);
                std::vector<std::int64_t> powers{1};
                while (powers.back() < static_cast<std::int64_t>(q * q)) powers.push_back(powers.back() * p);
                for (auto m : powers)
                    for (auto r : powers) {
                        if (std::gcd(m, r) != 1) continue;
                        REQUIRE(verify_closed_form(kernel, chi, m, m, m, r).pass);
                        REQUIRE(verify_closed_form(kernel, chi, m, 1, 1, r).pass);
                        REQUIRE(verify_closed_form(kernel, chi, 1, m, 1, r).pass);
                    }
            }
        }
    }
}

TEST_CASE("closed form rejects convention violations") {
    auto chi = primitive_characters(9).front();
    auto psi = DirichletCharacter::principal(9);
    REQUIRE_THROWS_AS(h_hat_closed_form(psi, chi, 2, 1, 1, 1), std::domain_error);   // 2 not a 3-power
    REQUIRE_THROWS_AS(h_hat_closed_form(psi, chi, 3, 1, 1, 3), std::domain_error);   // (m1, r) > 1
    REQUIRE_THROWS_AS(h_hat_closed_form(psi, chi, 0, 1, 1, 1), std::domain_error);   // m = 0 routed elsewhere
    auto chi15 = primitive_characters(15).front();
    auto psi15 = DirichletCharacter::principal(15);
    REQUIRE_THROWS_AS(h_hat_closed_form(psi15, chi15, 1, 1, 1, 1), std::domain_error);  // q not a prime power
}

TEST_CASE("fourier inversion on q=5 and q=9 sample tuples") {
    for (std::uint64_t q : {5u, 9u}) {
        std::vector<HhatKernel> kernels;
        for (auto& psi : DirichletCharacter::enumerate_all(q)) kernels.push_back(make_hhat_kernel(psi));
        for (auto& chi : primitive_characters(q)) {
            const std::int64_t p = static_cast<std::int64_t>(factorize(q).factors[0].first);
            for (std::int64_t m1 : {std::int64_t(1), p})
                for (std::int64_t r : {std::int64_t(1), p}) {
                    if (std::gcd(m1, r) != 1) continue;
                    auto rep = verify_fourier_inversion(kernels, chi, m1, 1, p, r);
                    INFO(to_json_line(rep));
                    REQUIRE(rep.pass);
                }
        }
    }
}

TEST_CASE("crt twist: q=15 including nontrivial epsilon and q1=1 degenerate") {
    const std::uint64_t q = 15;
    for (auto& chi : primitive_characters(q)) {
        for (auto& psi : DirichletCharacter::enumerate_all(q)) {
            REQUIRE(verify_crt_twist(3, 5, chi, psi, 1, 1, 1, 1).pass);
            REQUIRE(verify_crt_twist(3, 5, chi, psi, 3, 5, 1, 1).pass);
            REQUIRE(verify_crt_twist(5, 3, chi, psi, 5, 3, 9, 1).pass);
            REQUIRE(verify_crt_twist(1, 15, chi, psi, 1, 3, 5, 1).pass);
        }
    }
    auto chi = primitive_characters(q).front();
    REQUIRE_THROWS_AS(verify_crt_twist(3, 3, chi, chi, 1, 1, 1, 1), std::domain_error);
}

TEST_CASE("ell invariant: defining property and conductor detection") {
    for (std::uint64_t p : {3u, 5u, 7u}) {
        const std::uint64_t q = p * p;
        for (auto& chi : DirichletCharacter::enumerate_all(q)) {
            if (chi.is_principal()) continue;
            const auto ell = ell_of_char(chi);
            // chi(1 + p t) = e_p(ell t) for all t.
            for (std::uint64_t t = 0; t < p; ++t) {
                const Complex lhs = chi.eval(static_cast<std::int64_t>(1 + p * t));
                const double theta = kTwoPi * static_cast<double>((ell.ell * t) % p) / static_cast<double>(p);
                REQUIRE(std::abs(lhs - Complex(std::cos(theta), std::sin(theta))) < 1e-12);
            }
            REQUIRE((std::gcd(ell.ell, p) == 1) == chi.is_primitive());
            if (!chi.is_primitive()) REQUIRE(ell.ell == 0);
        }
    }
    REQUIRE_THROWS_AS(ell_of_char(primitive_characters(5).front()), std::domain_error);
    REQUIRE_THROWS_AS(ell_of_char(primitive_characters(27).front()), std::domain_error);
}

TEST_CASE("g_sum_psquared agrees with g_sum exhaustively for p=3,5") {
    for (std::uint64_t p : {3u, 5u}) {
        const std::uint64_t q = p * p;
        for (auto& chi : primitive_characters(q)) {
            for (auto& psi : DirichletCharacter::enumerate_all(q)) {
                const Complex fast = g_sum_psquared(chi, psi);
                const Complex slow = g_sum(chi, psi);
                REQUIRE(std::abs(fast - slow) < sum_tolerance(static_cast<double>(q) * q));
                REQUIRE(std::abs(fast) <= 2.0 * static_cast<double>(q) + 1e-9);
                if (!psi.is_primitive()) REQUIRE(fast == Complex(0.0, 0.0));
            }
        }
    }
}

TEST_CASE("h_zero_bound examples") {
    auto chi = primitive_characters(5).front();
    auto r1 = h_zero_bound(chi, 0, 1, 1, 1, 4.0);
    REQUIRE(r1.pass);
    auto r2 = h_zero_bound(chi, 0, 0, 0, 1, 4.0);
    REQUIRE(r2.pass);
    REQUIRE(std::abs(r2.lhs) <= 4.0 * 25.0 * 8.0 + 1e-9);
    REQUIRE_THROWS_AS(h_zero_bound(chi, 1, 2, 3, 1, 1.0), std::invalid_argument);
}
