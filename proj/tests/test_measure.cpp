#include <cmath>

#include <gtest/gtest.h>

#include "sharplad/measure.hpp"

using namespace sharplad;

TEST(Ensemble, DeterministicAndRegenerable) {
    const auto a = sample_ensemble(4, 2, 7);
    const auto b = sample_ensemble(4, 2, 7);
    ASSERT_EQ(a.data().size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
    const auto c = sample_ensemble(4, 2, 8);
    EXPECT_NE(a.data()[0], c.data()[0]);
    // the first rows do not depend on m
    const auto big = sample_ensemble(10, 2, 7);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(a.data()[i], big.data()[i]);
}

TEST(Ensemble, Moments) {
    const std::size_t m = 100000, n = 10;
    const auto a = sample_ensemble(m, n, 3);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += a.row(i)[j];
        EXPECT_LT(std::abs(s / m), 4.0 / std::sqrt(double(m)));
    }
    double sq = 0;
    for (std::size_t i = 0; i < m; ++i) sq += dot(a.row(i), a.row(i));
    EXPECT_NEAR(sq / m, double(n), 5.0 * std::sqrt(2.0 * n / m) * n);
}

TEST(Ensemble, Validation) {
    EXPECT_THROW(sample_ensemble(0, 2, 1), DomainError);
    EXPECT_THROW(sample_ensemble(100000, 100000, 1), DomainError);
}

TEST(Forward, Basics) {
    const auto a = sample_ensemble(50, 4, 1);
    const Signal zero(Vec(4, 0.0));
    for (double v : forward(a, zero, Kind::Amplitude)) EXPECT_EQ(v, 0.0);
    const Signal x = sample_signal(4, 2);
    const auto amp = forward(a, x, Kind::Amplitude);
    const auto amp_neg = forward(a, -x, Kind::Amplitude);
    const auto inten = forward(a, x, Kind::Intensity);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(amp[i], amp_neg[i]);
        EXPECT_DOUBLE_EQ(inten[i], amp[i] * amp[i]);
    }
    EXPECT_THROW(forward(a, Signal{1.0, 2.0}, Kind::Amplitude), DomainError);
}

TEST(Metrics, SignInvarianceAndOrthonormalPair) {
    const Signal x{1.0, -2.0, 0.5};
    EXPECT_EQ(dist1(x, -x), 0.0);
    EXPECT_EQ(dist2(x, -x), 0.0);
    const Signal e1{1.0, 0.0}, e2{0.0, 1.0};
    EXPECT_DOUBLE_EQ(dist1(e1, e2), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(dist2(e1, e2), 2.0);
    EXPECT_THROW(dist1(e1, x), DomainError);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const Signal u = sample_signal(6, s), v = sample_signal(6, 1000 + s);
        EXPECT_LE(dist1(u, v) * dist1(u, v), dist2(u, v) * (1 + 1e-12));
    }
}

TEST(Signal, Validation) {
    EXPECT_THROW(Signal(Vec{}), DomainError);
    EXPECT_THROW(Signal({1.0, std::nan("")}), DomainError);
}

TEST(Adversary, AmplitudeDecoyGeometry) {
    const Signal x0 = sample_signal(5, 9);
    const BalanceArgmin p{0.3, 0.6};
    const Signal xs = decoy_signal(x0, Kind::Amplitude, p);
    EXPECT_NEAR(dot(xs.values(), x0.values()) / (xs.norm() * x0.norm()), 0.3, 1e-10);
    EXPECT_NEAR(xs.norm() / x0.norm(), 0.6, 1e-10);
}

TEST(Adversary, IntensityDecoyCorrelation) {
    const Signal x0 = sample_signal(5, 10);
    const Signal xs = decoy_signal(x0, Kind::Intensity, BalanceArgmin{0.8, std::nullopt});
    const Vec u = axpy(x0.values(), -1.0, xs.values());
    const Vec v = axpy(x0.values(), 1.0, xs.values());
    EXPECT_NEAR(dot(u, v) / (norm2(u) * norm2(v)), 0.8, 1e-12);
}

TEST(Adversary, SupportAndOutliers) {
    const auto a = sample_ensemble(2500, 5, 4);
    const Signal x0 = sample_signal(5, 5);
    for (Kind kind : {Kind::Amplitude, Kind::Intensity}) {
        const BalanceArgmin p = kind == Kind::Amplitude ? BalanceArgmin{0.0, 0.374} : BalanceArgmin{0.8, std::nullopt};
        for (double s : {0.05, 0.2}) {
            const auto plan = build_adversary(a, x0, s, kind, p);
            const std::size_t k = static_cast<std::size_t>(std::floor(s * 2500 + 1e-9));
            ASSERT_EQ(plan.support.size(), k);
            std::size_t nonzero = 0;
            for (double z : plan.z) nonzero += z != 0.0 ? 1 : 0;
            EXPECT_EQ(nonzero, k);
            const auto fs = forward(a, plan.x_star, kind);
            const auto f0 = forward(a, x0, kind);
            double smallest_in = INFINITY, largest_out = 0;
            std::vector<char> in(2500, 0);
            for (std::size_t i : plan.support) {
                in[i] = 1;
                EXPECT_EQ(plan.z[i], fs[i] - f0[i]);
                smallest_in = std::min(smallest_in, std::abs(fs[i] - f0[i]));
            }
            for (std::size_t i = 0; i < 2500; ++i)
                if (!in[i]) largest_out = std::max(largest_out, std::abs(fs[i] - f0[i]));
            EXPECT_GE(smallest_in, largest_out);
        }
    }
}

TEST(Adversary, SupportIsExactTopSetOnSmallInstances) {
    // exhaustive check: no other subset of the same size has a larger total
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = sample_ensemble(12, 3, seed);
        const Signal x0 = sample_signal(3, seed + 100);
        const auto plan = build_adversary(a, x0, 0.25, Kind::Amplitude, BalanceArgmin{0.2, 0.5});
        const auto fs = forward(a, plan.x_star, Kind::Amplitude);
        const auto f0 = forward(a, x0, Kind::Amplitude);
        Vec gap(12);
        for (std::size_t i = 0; i < 12; ++i) gap[i] = std::abs(fs[i] - f0[i]);
        double best = -1;
        std::uint32_t best_mask = 0;
        for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
            if (__builtin_popcount(mask) != 3) continue;
            double t = 0;
            for (std::size_t i = 0; i < 12; ++i)
                if ((mask >> i) & 1u) t += gap[i];
            if (t > best) best = t, best_mask = mask;
        }
        std::uint32_t plan_mask = 0;
        for (std::size_t i : plan.support) plan_mask |= 1u << i;
        EXPECT_EQ(plan_mask, best_mask);
    }
}

TEST(Adversary, TiesGoToLowerIndex) {
    const Vec v{1.0, 3.0, 3.0, 2.0, 3.0};
    const auto top = top_k_indices(v, 2);
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0], 1u);
    EXPECT_EQ(top[1], 2u);
}

TEST(Adversary, DecoyCommutesWithSign) {
    const auto a = sample_ensemble(200, 4, 6);
    const Signal x0 = sample_signal(4, 7);
    for (Kind kind : {Kind::Amplitude, Kind::Intensity}) {
        const BalanceArgmin p = kind == Kind::Amplitude ? BalanceArgmin{0.1, 0.4} : BalanceArgmin{0.8, std::nullopt};
        const auto plus = build_adversary(a, x0, 0.2, kind, p);
        const auto minus = build_adversary(a, -x0, 0.2, kind, p);
        EXPECT_LT(dist1(plus.x_star, minus.x_star), 1e-12);
        EXPECT_EQ(plus.support, minus.support);
    }
}

TEST(Adversary, Validation) {
    const auto a = sample_ensemble(50, 3, 1);
    const Signal x0{1.0, 0.0, 0.0};
    const BalanceArgmin p{0.0, 0.4};
    EXPECT_THROW(build_adversary(a, x0, 0.0, Kind::Amplitude, p), DomainError);
    EXPECT_THROW(build_adversary(a, x0, 0.01, Kind::Amplitude, p), DomainError);
    EXPECT_THROW(build_adversary(a, Signal{0.0, 0.0, 0.0}, 0.2, Kind::Amplitude, p), DomainError);
    EXPECT_THROW(build_adversary(a, Signal{1.0, 0.0}, 0.2, Kind::Amplitude, p), DomainError);
    EXPECT_THROW(build_adversary(a, x0, 0.2, Kind::Amplitude, BalanceArgmin{0.5, std::nullopt}), DomainError);
}

TEST(Corrupt, Bookkeeping) {
    const auto a = sample_ensemble(1000, 5, 2);
    const Signal x0 = sample_signal(5, 3);
    const Vec clean = forward(a, x0, Kind::Amplitude);
    const auto plain = corrupt(clean, Kind::Amplitude, NoiseSpec{});
    EXPECT_EQ(plain.b, clean);
    EXPECT_TRUE(plain.support.empty());

    const auto plan = build_adversary(a, x0, 0.1, Kind::Amplitude, BalanceArgmin{0.0, 0.374});
    const auto noisy = corrupt(clean, Kind::Amplitude, NoiseSpec::parse("uniform:0.01", 4), plan);
    double l1 = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        EXPECT_NEAR(noisy.b[i], noisy.clean[i] + noisy.omega[i] + noisy.z[i], 1e-12);
        EXPECT_GE(noisy.clean[i], 0.0);
        l1 += std::abs(noisy.omega[i]);
    }
    EXPECT_LE(l1 / 1000, 0.01);
    EXPECT_EQ(noisy.support.size(), 100u);

    const auto rnd = corrupt(clean, Kind::Amplitude, NoiseSpec::parse("gaussian:0.1", 1), RandomOutlierSpec{0.05, 3.0, 9});
    EXPECT_EQ(rnd.support.size(), 50u);
    for (std::size_t i = 0; i < 1000; ++i) {
        const bool in = std::binary_search(rnd.support.begin(), rnd.support.end(), i);
        if (!in) {
            EXPECT_EQ(rnd.z[i], 0.0);
        }
    }
}

TEST(Corrupt, InconsistentInputs) {
    const auto a = sample_ensemble(100, 3, 2);
    const Signal x0 = sample_signal(3, 3);
    const auto plan = build_adversary(a, x0, 0.1, Kind::Amplitude, BalanceArgmin{0.0, 0.4});
    const Vec short_clean(50, 1.0);
    EXPECT_THROW(corrupt(short_clean, Kind::Amplitude, NoiseSpec{}, plan), DomainError);
    EXPECT_THROW(corrupt(forward(a, x0, Kind::Intensity), Kind::Intensity, NoiseSpec{}, plan), DomainError);
    EXPECT_THROW(NoiseSpec::parse("laplace:0.1"), DomainError);
    EXPECT_THROW(NoiseSpec::parse("uniform"), DomainError);
    EXPECT_THROW(NoiseSpec::parse("uniform:-1"), DomainError);
}
