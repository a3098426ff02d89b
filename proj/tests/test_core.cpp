#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ietlab/induce.hpp"
#include "ietlab/json_io.hpp"
#include "ietlab/rng.hpp"

using namespace ietlab;

namespace {

// independent sign-table oracle for the displacement matrix
int omega_oracle(const Permutation& p, std::size_t i, std::size_t j) {
    if (i < j && p(i) > p(j)) return 1;
    if (i > j && p(i) < p(j)) return -1;
    return 0;
}

// continued fraction digits of a rational in (0,1)
std::vector<mpz_class> cf_digits(mpq_class x, std::size_t max_terms = 64) {
    std::vector<mpz_class> a;
    mpq_class r = x;
    while (r != 0 && a.size() < max_terms) {
        r = 1 / r;
        mpz_class ai = r.get_num() / r.get_den();
        a.push_back(ai);
        r -= mpq_class(ai);
    }
    return a;
}

std::vector<mpz_class> cf_denominators(const std::vector<mpz_class>& a) {
    std::vector<mpz_class> q{1};
    mpz_class qm1 = 0, qq = 1;
    for (const auto& ai : a) {
        mpz_class qn = ai * qq + qm1;
        qm1 = qq;
        qq = qn;
        q.push_back(qq);
    }
    return q;
}

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

} // namespace

TEST_CASE("displacement matrix against the sign-table oracle") {
    SUBCASE("d=2") {
        auto om = displacement_matrix(Permutation({2, 1}));
        CHECK(om[0][0] == 0);
        CHECK(om[0][1] == 1);
        CHECK(om[1][0] == -1);
        CHECK(om[1][1] == 0);
    }
    SUBCASE("d=3 symmetric") {
        auto om = displacement_matrix(Permutation({3, 2, 1}));
        int expect[3][3] = {{0, 1, 1}, {-1, 0, 1}, {-1, -1, 0}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(om[i][j] == expect[i][j]);
    }
    SUBCASE("antisymmetry and oracle agreement for random permutations") {
        Rng rng(11);
        for (int trial = 0; trial < 40; ++trial) {
            std::size_t d = 2 + rng.index(6);
            std::vector<std::size_t> images(d);
            for (std::size_t i = 0; i < d; ++i) images[i] = i + 1;
            for (std::size_t i = d; i > 1; --i) std::swap(images[i - 1], images[rng.index(i)]);
            Permutation p(images);
            auto om = displacement_matrix(p);
            for (std::size_t i = 1; i <= d; ++i)
                for (std::size_t j = 1; j <= d; ++j) {
                    CHECK(om[i - 1][j - 1] == omega_oracle(p, i, j));
                    CHECK(om[i - 1][j - 1] + om[j - 1][i - 1] == 0);
                }
        }
    }
}

TEST_CASE("make_iet") {
    SUBCASE("rotation by one half") {
        Iet t = make_iet<double>({2, 1}, {0.5, 0.5});
        CHECK(t.displacements()[0] == doctest::Approx(0.5));
        CHECK(t.displacements()[1] == doctest::Approx(-0.5));
    }
    SUBCASE("identity permutation is reducible") {
        CHECK_THROWS_AS(make_iet<double>({1, 2}, {0.5, 0.5}), ReduciblePermutation);
        CHECK_THROWS_AS(make_iet<double>({1, 3, 2}, {0.3, 0.3, 0.4}), ReduciblePermutation);
    }
    SUBCASE("non-positive lengths rejected") {
        CHECK_THROWS_AS(make_iet<double>({2, 1}, {0.5, 0.0}), NonPositiveLength);
        CHECK_THROWS_AS(make_iet<double>({2, 1}, {-0.1, 1.1}), NonPositiveLength);
    }
    SUBCASE("normalization and exact linear identities") {
        Rng rng(5);
        for (int trial = 0; trial < 25; ++trial) {
            std::size_t d = 2 + rng.index(4);
            Iet t(Permutation::symmetric(d), rng.simplex(d));
            double sum = 0;
            for (double l : t.lengths()) sum += l;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            // delta = Omega lambda
            auto om = displacement_matrix(t.perm());
            for (std::size_t i = 0; i < d; ++i) {
                double di = 0;
                for (std::size_t j = 0; j < d; ++j) di += om[i][j] * t.lengths()[j];
                CHECK(t.displacements()[i] == doctest::Approx(di).epsilon(1e-14));
            }
            // endpoints are prefix sums
            for (std::size_t i = 1; i <= d; ++i)
                CHECK(t.endpoints()[i] ==
                      doctest::Approx(t.endpoints()[i - 1] + t.lengths()[i - 1]));
        }
    }
    SUBCASE("images tile the interval") {
        Iet t = make_iet<double>({3, 1, 2}, {0.2, 0.5, 0.3});
        std::vector<std::pair<double, double>> images;
        for (std::size_t i = 0; i < 3; ++i) {
            double lo = t.endpoints()[i] + t.displacements()[i];
            images.push_back({lo, lo + t.lengths()[i]});
        }
        std::sort(images.begin(), images.end());
        CHECK(images.front().first == doctest::Approx(0.0));
        CHECK(images.back().second == doctest::Approx(1.0));
        for (std::size_t i = 1; i < images.size(); ++i)
            CHECK(images[i].first == doctest::Approx(images[i - 1].second));
    }
}

TEST_CASE("apply_orbit") {
    SUBCASE("worked 3-interval example") {
        Iet t = make_iet<double>({3, 2, 1}, {0.3, 0.3, 0.4}, false);
        auto orb = apply_orbit(t, 0.1, 2);
        CHECK(orb[0] == doctest::Approx(0.1));
        CHECK(orb[1] == doctest::Approx(0.8)); // delta_1 = lambda_2 + lambda_3
    }
    SUBCASE("period two rotation") {
        Iet t = make_iet<double>({2, 1}, {0.5, 0.5}, false);
        auto orb = apply_orbit(t, 0.25, 3);
        CHECK(orb[0] == doctest::Approx(0.25));
        CHECK(orb[1] == doctest::Approx(0.75));
        CHECK(orb[2] == doctest::Approx(0.25));
    }
    SUBCASE("forward then backward returns the point") {
        Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            Iet t(Permutation::symmetric(4), rng.simplex(4));
            double x = rng.uniform();
            long r = 1 + static_cast<long>(rng.index(50));
            auto fwd = apply_orbit(t, x, r);
            auto back = apply_orbit(t, fwd.back(), r, Direction::backward);
            CHECK(std::fabs(back.back() - x) < 1e-12 * static_cast<double>(r));
        }
    }
    SUBCASE("piecewise isometry on tower floors") {
        double alpha = 0.6180339887498949;
        Iet t = make_iet<double>({2, 1}, {alpha, 1 - alpha}, false);
        auto im = induce_first_return(t, 0.0, alpha, 100);
        for (std::size_t j = 0; j < im.towers.size(); ++j) {
            double x = im.towers[j].lo + 0.25 * im.towers[j].width();
            double y = im.towers[j].lo + 0.75 * im.towers[j].width();
            double gap = y - x;
            for (long k = 0; k < im.return_times[j]; ++k) {
                CHECK(std::fabs((y - x) - gap) < 1e-14);
                x = t.apply(x);
                y = t.apply(y);
            }
        }
    }
}

TEST_CASE("keane_depth_check") {
    SUBCASE("rational rotation violates at m=2") {
        Iet t = make_iet<double>({2, 1}, {0.5, 0.5}, false);
        auto v = keane_depth_check(t, 10);
        REQUIRE(v.has_value());
        CHECK(v->m == 2);
    }
    SUBCASE("golden rotation passes deep check; CF oracle confirms") {
        mpq_class alpha = golden_rational();
        // oracle: ||q alpha|| > 0 for q below the largest denominator used
        auto digits = cf_digits(alpha);
        auto dens = cf_denominators(digits);
        CHECK(dens.size() > 30);
        RatIet t = make_iet<mpq_class>({2, 1}, {alpha, 1 - alpha}, false);
        CHECK_FALSE(keane_depth_check(t, 2000).has_value());
        Iet td = to_double_iet(t);
        CHECK_FALSE(keane_depth_check(td, 10000).has_value());
    }
    SUBCASE("random lengths pass") {
        Rng rng(23);
        for (int trial = 0; trial < 10; ++trial) {
            Iet t(Permutation::symmetric(3), rng.simplex(3));
            CHECK_FALSE(keane_depth_check(t, 1000).has_value());
        }
    }
}

TEST_CASE("induce_first_return") {
    double alpha = 0.6180339887498949;
    Iet rot = make_iet<double>({2, 1}, {alpha, 1 - alpha}, false);
    SUBCASE("full interval gives the map itself") {
        auto im = induce_first_return(rot, 0.0, 1.0, 10);
        for (long h : im.return_times) CHECK(h == 1);
        CHECK(im.sub_iet.perm() == rot.perm());
    }
    SUBCASE("golden window return times follow the three-distance pattern") {
        auto im = induce_first_return(rot, 0.0, alpha, 100);
        std::vector<long> times = im.return_times;
        std::sort(times.begin(), times.end());
        CHECK(times == std::vector<long>{1, 2});
    }
    SUBCASE("towers partition the interval at renormalization windows") {
        Rng rng(31);
        for (int trial = 0; trial < 8; ++trial) {
            Iet t(Permutation::symmetric(4), rng.simplex(4));
            auto trace = induction_trace(t, 6, InductionMode::zorich, TiePolicy::truncate);
            REQUIRE(!trace.steps.empty());
            double len = trace.steps.back().interval_length;
            auto im = induce_first_return(t, 0.0, len, 2'000'000);
            double area = 0;
            for (const auto& tw : im.towers) area += tw.area();
            CHECK(area == doctest::Approx(1.0).epsilon(1e-9));
            // heights agree with the exact cocycle heights
            std::vector<double> hs;
            for (const auto& h : trace.steps.back().heights) hs.push_back(h.get_d());
            std::vector<double> is(im.return_times.begin(), im.return_times.end());
            std::sort(hs.begin(), hs.end());
            std::sort(is.begin(), is.end());
            REQUIRE(hs.size() == is.size());
            for (std::size_t i = 0; i < hs.size(); ++i) CHECK(hs[i] == doctest::Approx(is[i]));
        }
    }
    SUBCASE("budget exhaustion reported") {
        CHECK_THROWS_AS(induce_first_return(rot, 0.0, 1e-5, 10), ReturnTimeExceeded);
    }
    SUBCASE("exact rational induction") {
        mpq_class alpha_q = golden_rational();
        RatIet t = make_iet<mpq_class>({2, 1}, {alpha_q, 1 - alpha_q}, false);
        auto im = induce_first_return(t, mpq_class(0), alpha_q, 100);
        mpq_class area = 0;
        for (const auto& tw : im.towers) area += tw.width() * mpq_class(tw.height.get_str());
        CHECK(area == 1); // exact partition
    }
}

TEST_CASE("iet json round trip") {
    Rng rng(41);
    Iet t(Permutation::symmetric(5), rng.simplex(5));
    Json j = iet_to_json(t);
    Iet back = iet_from_json(j);
    CHECK(back.perm() == t.perm());
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(back.lengths()[i] == t.lengths()[i]); // bit-exact through JSON

    mpq_class alpha = golden_rational();
    RatIet rt = make_iet<mpq_class>({2, 1}, {alpha, 1 - alpha}, false);
    Json jr = iet_to_json(rt);
    CHECK(json_iet_is_exact(jr));
    RatIet rback = rat_iet_from_json(jr);
    CHECK(rback.lengths()[0] == alpha);
}
