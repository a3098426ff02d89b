#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ietlab/rigidity.hpp"
#include "ietlab/rng.hpp"

using namespace ietlab;

namespace {

mpq_class golden_rational(int n = 45) {
    mpz_class f0 = 0, f1 = 1;
    for (int i = 0; i < n; ++i) {
        mpz_class f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
    }
    mpq_class a(f0, f1);
    a.canonicalize();
    return a;
}

RatIet golden_exact() {
    mpq_class a = golden_rational();
    return make_iet<mpq_class>({2, 1}, {a, 1 - a}, false);
}

} // namespace

TEST_CASE("tower certificates from traces") {
    SUBCASE("epsilon range is validated") {
        Rng rng(1);
        Iet t(Permutation::symmetric(3), rng.simplex(3));
        auto trace = induction_trace(t, 10, InductionMode::rauzy, TiePolicy::truncate);
        CHECK_THROWS_AS(detect_rigid_towers(trace, 0.5), Error);
        CHECK_THROWS_AS(detect_rigid_towers(trace, 0.9), Error);
    }
    SUBCASE("strict gate implies the measured displacement bound") {
        Rng rng(2);
        std::size_t found = 0;
        for (int trial = 0; trial < 60 && found < 5; ++trial) {
            Iet t(Permutation::symmetric(4), rng.simplex(4));
            auto trace = induction_trace(t, 60, InductionMode::rauzy, TiePolicy::truncate);
            for (const auto& cert : detect_rigid_towers(trace, 0.45)) {
                CHECK(cert.displacement <
                      cert.epsilon * (cert.tower.hi - cert.tower.lo));
                ++found;
            }
        }
        CHECK(found > 0);
    }
    SUBCASE("certificates re-verify from the orbit, and T^h is constant on the base") {
        RatIet g = golden_exact();
        auto trace = induction_trace(g, 14, InductionMode::zorich, TiePolicy::truncate);
        Iet gd = to_double_iet(g);
        auto certs = all_tower_certificates(trace);
        int verified = 0;
        for (const auto& cert : certs) {
            if (cert.tower.height.get_d() > 3000) continue;
            CHECK(verify_certificate(gd, cert, 1e-10));
            ++verified;
        }
        CHECK(verified >= 6);
        // exact equality of endpoint walks in rational mode
        for (std::size_t n = 0; n < 8; ++n)
            for (std::size_t col = 1; col <= 2; ++col)
                CHECK(verify_certificate_exact(g, trace, n, col));
    }
    SUBCASE("golden absolute displacements decrease monotonically") {
        RatIet g = golden_exact();
        auto trace = induction_trace(g, 16, InductionMode::zorich, TiePolicy::truncate);
        std::vector<double> disp;
        for (std::size_t n = 0; n < trace.steps.size(); ++n) {
            auto cert = rigdetail::tower_certificate(trace, n, 1);
            disp.push_back(cert.displacement);
            // bounded type: the relative quality never improves past a constant
            CHECK(cert.ratio() > 0.5);
        }
        for (std::size_t n = 1; n < disp.size(); ++n) CHECK(disp[n] <= disp[n - 1]);
        for (std::size_t n = 2; n < disp.size(); ++n) CHECK(disp[n] < disp[n - 2]);
    }
}

TEST_CASE("almost cylinders") {
    Rng rng(3);
    SUBCASE("zero displacement keeps the base") {
        RigidityCertificate cert;
        cert.tower = TowerDescriptor{0.1, 0.3, BigInt(5), std::nullopt};
        cert.displacement = 0.0;
        cert.signed_displacement = 0.0;
        auto cyl = almost_cylinder(cert);
        CHECK(cyl.lo == 0.1);
        CHECK(cyl.hi == 0.3);
    }
    SUBCASE("area ratio equals one minus the displacement fraction") {
        RigidityCertificate cert;
        cert.tower = TowerDescriptor{0.2, 0.4, BigInt(7), std::nullopt};
        cert.displacement = 0.05;
        cert.signed_displacement = -0.05;
        auto cyl = almost_cylinder(cert);
        CHECK(cyl.area() / cert.tower.area() == doctest::Approx(1.0 - 0.05 / 0.2));
    }
    SUBCASE("degenerate shrink rejected") {
        RigidityCertificate cert;
        cert.tower = TowerDescriptor{0.2, 0.25, BigInt(3), std::nullopt};
        cert.displacement = 0.06;
        CHECK_THROWS_AS(almost_cylinder(cert), DegenerateShrink);
    }
    SUBCASE("the top floor maps the shrunk base into the base") {
        for (int trial = 0; trial < 25; ++trial) {
            Iet t(Permutation::symmetric(4), rng.simplex(4));
            auto trace = induction_trace(t, 40, InductionMode::rauzy, TiePolicy::truncate);
            auto certs = all_tower_certificates(trace);
            for (const auto& cert : certs) {
                double h = cert.tower.height.get_d();
                if (h > 4000 || cert.displacement >= cert.tower.hi - cert.tower.lo) continue;
                auto cyl = almost_cylinder(cert);
                double mid = 0.5 * (cyl.lo + cyl.hi);
                double x = mid;
                for (long k = 0; k < static_cast<long>(h); ++k) x = t.apply(x);
                CHECK(x >= cert.tower.lo);
                CHECK(x < cert.tower.hi);
                break;
            }
        }
    }
}

TEST_CASE("displacement profile and measure rigidity") {
    RatIet g = golden_exact();
    Iet gd = to_double_iet(g);
    SUBCASE("profile masses sum to one and displacements are orbit-consistent") {
        auto prof = displacement_profile(gd, 13);
        double mass = 0;
        Rng rng(5);
        for (const auto& p : prof) mass += p.hi - p.lo;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        for (int trial = 0; trial < 20; ++trial) {
            double x = rng.uniform();
            double y = x;
            for (int k = 0; k < 13; ++k) y = gd.apply(y);
            for (const auto& p : prof)
                if (x >= p.lo && x < p.hi) CHECK(y - x == doctest::Approx(p.shift).epsilon(1e-9));
        }
    }
    SUBCASE("golden denominators are measure rigidity times") {
        // ||q alpha|| ~ 0.447/q: displacement profile has two shifts of size
        // ||q alpha|| and 1 - ||q alpha|| with mass ||q alpha|| on the wrap
        CHECK(is_measure_rigidity_time(gd, 55, 0.05));
        CHECK(is_measure_rigidity_time(gd, 233, 0.02));
        CHECK_FALSE(is_measure_rigidity_time(gd, 60, 0.01)); // not a denominator
    }
}

TEST_CASE("rigidity times in windows") {
    RatIet g = golden_exact();
    auto trace = induction_trace(g, 18, InductionMode::zorich, TiePolicy::truncate);
    SUBCASE("windows around Fibonacci numbers are all hit") {
        std::vector<long> fib{5, 8, 13, 21, 34, 55, 89, 144, 233, 377};
        std::vector<std::pair<double, double>> windows;
        for (long f : fib) windows.push_back({0.5 * f, 1.5 * f});
        // merge overlapping neighbors into disjoint sorted windows
        std::vector<std::pair<double, double>> disjoint;
        for (auto w : windows) {
            if (!disjoint.empty() && w.first < disjoint.back().second)
                w.first = disjoint.back().second;
            if (w.second > w.first) disjoint.push_back(w);
        }
        auto reports = rigidity_times_in_window(trace, 0.7, disjoint);
        for (const auto& rep : reports) {
            CHECK(!rep.hits.empty());
            for (const auto& hit : rep.hits) {
                CHECK(hit.q >= rep.lo);
                CHECK(hit.q < rep.hi);
                CHECK(hit.ratio < 0.7);
            }
        }
    }
    SUBCASE("gaps between heights give empty hit lists") {
        // a narrow window between consecutive Fibonacci numbers
        auto reports = rigidity_times_in_window(trace, 0.7, {{90.0, 140.0}});
        CHECK(reports[0].hits.empty());
    }
    SUBCASE("depth exceeded when the trace cannot reach the window") {
        CHECK_THROWS_AS(rigidity_times_in_window(trace, 0.7, {{1e15, 2e15}}), DepthExceeded);
    }
    SUBCASE("unsorted windows rejected") {
        CHECK_THROWS_AS(rigidity_times_in_window(trace, 0.7, {{100.0, 200.0}, {150.0, 300.0}}),
                        Error);
    }
}

TEST_CASE("resonant times") {
    SUBCASE("parameter validation") {
        Rng rng(7);
        Iet t(Permutation::symmetric(4), rng.simplex(4));
        CHECK_THROWS_AS(resonant_times(t, 0.2, 6, 10), Error); // k_max > 1/eps
    }
    SUBCASE("golden rotation: measure-flavor certificates for eps=0.2, k up to 5") {
        RatIet g = golden_exact();
        Iet gd = to_double_iet(g);
        auto certs = resonant_times(gd, 0.2, 5, 24);
        REQUIRE(!certs.empty());
        bool k5 = false;
        for (const auto& rc : certs) {
            CHECK(rc.r == rc.k * rc.q);
            CHECK(rc.k * rc.epsilon <= 1.0 + 1e-12);
            if (rc.k == 5) k5 = true;
            CHECK(rc.flavor == CertificateFlavor::measured);
            CHECK(rc.multiples_verified);
        }
        CHECK(k5);
        // the certified q are Fibonacci denominators with ||q alpha|| < eps^2
        for (const auto& rc : certs) {
            double alpha = 0.6180339887498949;
            double frac = std::fabs(rc.q * alpha - std::round(rc.q * alpha));
            CHECK(frac < 0.04);
        }
    }
    SUBCASE("k=1 certificates coincide with rigidity times") {
        RatIet g = golden_exact();
        auto certs = resonant_times(to_double_iet(g), 0.2, 1, 24);
        for (const auto& rc : certs) CHECK(rc.k == 1);
        CHECK(!certs.empty());
    }
}

TEST_CASE("coexistence search") {
    Rng rng(11);
    SUBCASE("tiny log coefficients: the bound is dominated by sup |g'|") {
        Iet t(Permutation::symmetric(4), rng.simplex(4));
        std::vector<double> cp(4, 1e-6), cm(4, 1e-6);
        PiecewiseLinear g{{0.5, -0.5, 0.25, 0.0}, {1.0, 1.4, 0.8, 1.0}};
        SymLogRoof f(t.endpoints(), cp, cm, g, true);
        CoexistenceConfig cfg;
        cfg.height_budget = 2e5;
        auto recs = coexistence_search(t, f, {0.5}, cfg);
        for (const auto& rec : recs) {
            CHECK(rec.trimmed_bound_M < 10.0 * g.sup_abs_slope() + 1.0);
        }
    }
    SUBCASE("records carry the window block data") {
        bool found = false;
        for (int trial = 0; trial < 30 && !found; ++trial) {
            Iet t(Permutation::symmetric(4), rng.simplex(4));
            SymLogRoof f = symmetric_unit_roof(t);
            CoexistenceConfig cfg;
            cfg.height_budget = 1e6;
            auto recs = coexistence_search(t, f, {0.5, 0.4}, cfg);
            for (const auto& rec : recs) {
                found = true;
                CHECK(rec.rigid_step > rec.balanced_step);
                CHECK(rec.window_balance <= cfg.balance_threshold);
                CHECK(rec.nu_B >= 1.0);
                CHECK(rec.tower.area > rec.area_lower_bound - 0.5);
                CHECK(rec.trimmed_bound_M > 0.0);
            }
        }
        CHECK(found);
    }
}

TEST_CASE("persistence bound for stacked towers") {
    // |S~_r f'| <= M h on level towers implies M' <= M + K C_sum / delta when
    // a tower of area >= delta is stacked from at most K lower towers
    Rng rng(13);
    std::size_t checked = 0;
    for (int trial = 0; trial < 20 && checked < 4; ++trial) {
        Iet t(Permutation::symmetric(4), rng.simplex(4));
        SymLogRoof f = symmetric_unit_roof(t);
        auto trace = induction_trace(t, 30, InductionMode::rauzy, TiePolicy::truncate);
        if (trace.steps.size() < 12) continue;
        std::size_t n = 6, m = 10;
        IMat block = trace.cumulative(n, m);
        double K = block.entry_sum().get_d();
        auto cert_m = rigdetail::tower_certificate(trace, m, 1);
        double delta = cert_m.area;
        if (delta < 0.05 || cert_m.tower.height.get_d() > 50000) continue;
        // M on the level-n towers
        double M = 0;
        for (std::size_t j = 1; j <= 4; ++j) {
            auto cert_n = rigdetail::tower_certificate(trace, n, j);
            M = std::max(M, fit_trimmed_bound(t, f, cert_n.tower.lo, cert_n.tower.hi,
                                              cert_n.tower.height.get_d(), 16, 12));
        }
        double Mp = fit_trimmed_bound(t, f, cert_m.tower.lo, cert_m.tower.hi,
                                      cert_m.tower.height.get_d(), 16, 12);
        CHECK(Mp <= M + K * f.coefficient_sum() / delta + 1e-6);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("rigidity gives L1 closeness") {
    // certified eps-rigidity time with tower area > 1-eps: the set where
    // |T^q x - x| > eps/q has measure < 2 eps
    Rng rng(17);
    std::size_t checked = 0;
    for (int trial = 0; trial < 60 && checked < 3; ++trial) {
        Iet t(Permutation::symmetric(4), rng.simplex(4));
        auto trace = induction_trace(t, 50, InductionMode::rauzy, TiePolicy::truncate);
        for (const auto& cert : all_tower_certificates(trace)) {
            double q = cert.tower.height.get_d();
            if (q > 2000 || q < 5) continue;
            double eps = std::max(1.0 - cert.area, cert.ratio());
            if (eps >= 0.4) continue;
            auto prof = displacement_profile(t, static_cast<long>(q));
            double bad = displaced_mass(prof, eps / q);
            CHECK(bad < 2 * eps + 1e-9);
            ++checked;
            break;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("roth acceleration and distortion") {
    SUBCASE("golden: both ratio families bounded") {
        RatIet g = golden_exact();
        auto trace = induction_trace(g, 60, InductionMode::rauzy, TiePolicy::truncate);
        auto rep = roth_distortion_report(trace, 0.3);
        REQUIRE(rep.rows.size() >= 20);
        CHECK(rep.running_max_height < 16.0);
        CHECK(rep.running_max_length < 16.0);
    }
    SUBCASE("a partial-quotient spike shows up as a height-ratio spike") {
        // alpha with continued fraction [0; 2,1,1,1,1,1, 40, 1,1,...]
        std::vector<long> digits{2, 1, 1, 1, 1, 1, 40, 1, 1, 1, 1, 1};
        mpq_class x = 0;
        for (auto it = digits.rbegin(); it != digits.rend(); ++it)
            x = 1 / (mpq_class(*it) + x);
        RatIet t = make_iet<mpq_class>({2, 1}, {x, 1 - x}, false);
        auto trace = induction_trace(t, 60, InductionMode::rauzy, TiePolicy::truncate);
        auto rep = roth_distortion_report(trace, 0.3);
        REQUIRE(rep.rows.size() >= 8);
        // the spike step dominates the median by a wide margin
        std::vector<double> ratios;
        for (const auto& row : rep.rows) ratios.push_back(row.height_ratio);
        double mx = *std::max_element(ratios.begin(), ratios.end());
        std::sort(ratios.begin(), ratios.end());
        double med = ratios[ratios.size() / 2];
        CHECK(mx > 5.0 * med);
    }
    SUBCASE("d=2 blocks are single-winner runs") {
        RatIet g = golden_exact();
        auto trace = induction_trace(g, 30, InductionMode::rauzy, TiePolicy::truncate);
        auto blocks = roth_accelerate(trace);
        for (const auto& b : blocks) {
            std::set<std::size_t> names;
            for (long n = b.first; n <= b.last; ++n)
                names.insert(trace.steps[static_cast<std::size_t>(n)].winner_label);
            CHECK(names.size() <= 1);
        }
    }
}
