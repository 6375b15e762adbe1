#include <doctest.h>

#include <cmath>

#include "vldp/errors.hpp"
#include "vldp/params.hpp"

using namespace vldp;

TEST_CASE("kRR discretization examples")
{
    struct Case {
        std::uint32_t width, d;
        std::uint64_t l, n, z;
    };
    for (auto c : {Case{100, 2, 73, 100, 74}, Case{100, 4, 23, 50, 24}, Case{100, 10, 19, 100, 20}}) {
        CAPTURE(c.d);
        auto sp = decide_shared_parameters(1.0, c.width, c.d);
        CHECK(sp.l == c.l);
        CHECK(sp.n == c.n);
        CHECK(sp.z == c.z);
        CHECK((sp.n - sp.l) % (c.d - 1) == 0);
    }
}

TEST_CASE("OUE discretization examples")
{
    CHECK(oue_shared_parameters(1.0, 100).l == 27);
    CHECK(oue_shared_parameters(1.0, 1000).l == 269);
    CHECK(oue_shared_parameters(1.0, 100).p_ones() == 50);
    CHECK_THROWS_AS(oue_shared_parameters(1.0, 99), ParameterError);
    CHECK_THROWS_AS(oue_shared_parameters(0.0, 100), ParameterError);
}

TEST_CASE("kRR discretization never overshoots and stays within (d-1)/width")
{
    for (std::uint32_t width : {100u, 1000u, 357u})
        for (std::uint32_t d = 2; d <= 16; ++d)
            for (int k = 1; k <= 50; ++k) {
                double eps = 0.1 * k;
                CAPTURE(width);
                CAPTURE(d);
                CAPTURE(eps);
                // Independent scan for the largest admissible true-symbol count.
                std::uint64_t best = 0;
                for (std::uint64_t i = 1; i <= width; ++i)
                    if ((width - i) % (d - 1) == 0 && (width - i) > 0 && i <= width * krr_p_exact(eps, d))
                        best = i;
                if (best == 0) {
                    CHECK_THROWS_AS(decide_shared_parameters(eps, width, d), ParameterError);
                    continue;
                }
                auto sp = decide_shared_parameters(eps, width, d);
                double err = approximation_error(sp);
                CHECK(err >= -1e-12);
                CHECK(err <= (d - 1.0) / width + 1e-12);
                CHECK(sp.l + (d - 1) * sp.other_count() == sp.n);
                CHECK(sp.z > std::max(sp.l, sp.other_count()));
                CHECK(static_cast<double>(best) / width == doctest::Approx(sp.p_approx()));
            }
}

TEST_CASE("OUE discretization rounds q up by less than 1/width")
{
    for (int k = 1; k <= 50; ++k) {
        double eps = 0.1 * k;
        auto sp = oue_shared_parameters(eps, 1000);
        double err = approximation_error(sp);
        CHECK(err >= 0);
        CHECK(err < 1.0 / 1000);
    }
}

TEST_CASE("invalid kRR requests")
{
    CHECK_THROWS_AS(decide_shared_parameters(0.0, 100, 4), ParameterError);
    CHECK_THROWS_AS(decide_shared_parameters(1.0, 100, 1), ParameterError);
    CHECK_THROWS_AS(decide_shared_parameters(1.0, 3, 4), ParameterError);
}

TEST_CASE("exact probabilities")
{
    double e = std::exp(1.0);
    CHECK(krr_p_exact(1.0, 10) == doctest::Approx(e / (9 + e)));
    CHECK(krr_q_exact(1.0, 10) == doctest::Approx(1 / (9 + e)));
    CHECK(krr_p_exact(1.0, 10) + 9 * krr_q_exact(1.0, 10) == doctest::Approx(1.0));
    CHECK(oue_q_exact(1.0) == doctest::Approx(1 / (1 + e)));
}
