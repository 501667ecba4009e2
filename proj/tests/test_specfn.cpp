#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharplad/specfn.hpp"

namespace sf = sharplad::specfn;

TEST(Erf, ZeroAndOddness) {
    EXPECT_EQ(sf::erf(0.0), 0.0);
    for (double x : {0.3, 1.7}) EXPECT_DOUBLE_EQ(sf::erf(x), -sf::erf(-x));
}

TEST(Erf, MatchesSeriesOracle) {
    EXPECT_NEAR(sf::erf(1.0), 0.8427007929497149, 1e-12);
    for (double x = -3.5; x <= 3.5; x += 0.125)
        EXPECT_NEAR(sf::erf(x), static_cast<double>(oracle::erf_taylor(x)), 1e-12) << x;
}

TEST(Erf, BoundedMonotoneAndSlopeAtOrigin) {
    double prev = -1.0;
    for (double x = -6.0; x <= 6.0; x += 0.01) {
        const double v = sf::erf(x);
        EXPECT_LE(std::abs(v), 1.0);
        EXPECT_GE(v, prev);
        prev = v;
    }
    const double h = 1e-6;
    EXPECT_NEAR((sf::erf(h) - sf::erf(-h)) / (2 * h), 2.0 / std::sqrt(std::numbers::pi), 1e-8);
}

TEST(BesselK0, CosineIntegralOracle) {
    EXPECT_NEAR(static_cast<double>(oracle::k0_cosine(1.0L)), 0.42102443824070834, 1e-12);
    EXPECT_NEAR(sf::bessel_k0(1.0), static_cast<double>(oracle::k0_cosine(1.0L)), 1e-10 * 0.4210244382);
    const double k10 = sf::bessel_k0(10.0);
    EXPECT_LT(k10, 2e-5);
    EXPECT_NEAR(k10, static_cast<double>(oracle::k0_cosine(10.0L)), 1e-10 * k10);
}

TEST(BesselK0, RelativeAccuracyAcrossMagnitudes) {
    for (double x : {1e-6, 1e-3, 0.05, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 20.0, 80.0, 300.0}) {
        // K0(x) = int_0^inf exp(-x cosh t) dt
        const long double ref = oracle::k0_scaled_cosh(x) * std::exp(-static_cast<long double>(x));
        EXPECT_NEAR(sf::bessel_k0(x), static_cast<double>(ref), 1e-10 * static_cast<double>(ref)) << x;
        EXPECT_NEAR(sf::bessel_k0_scaled(x), static_cast<double>(ref * std::exp(static_cast<long double>(x))),
                    1e-10 * static_cast<double>(ref * std::exp(static_cast<long double>(x))))
            << x;
    }
}

TEST(BesselK0, MonotoneAndLimits) {
    EXPECT_GT(sf::bessel_k0(0.5), sf::bessel_k0(2.0));
    double prev = sf::bessel_k0(1e-8);
    EXPECT_GT(prev, 18.0);
    for (double x = 0.01; x < 40.0; x *= 1.1) {
        const double v = sf::bessel_k0(x);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_EQ(sf::bessel_k0(1000.0), 0.0);
}

TEST(BesselK0, RejectsNonPositive) {
    EXPECT_THROW(sf::bessel_k0(0.0), sharplad::DomainError);
    EXPECT_THROW(sf::bessel_k0(-1.0), sharplad::DomainError);
    EXPECT_THROW(sf::bessel_k0_scaled(0.0), sharplad::DomainError);
}

TEST(BesselK0, FourierCosineIdentity) {
    for (double c : {0.5, 1.0, 2.0}) {
        for (double t : {0.5, 1.0, 3.0}) {
            // int_0^inf cos(t y) / sqrt(y^2 + c^2) dy = K0(c t); substitute y = c u
            const double ref = static_cast<double>(oracle::k0_cosine(static_cast<long double>(c * t)));
            EXPECT_NEAR(sf::bessel_k0(c * std::abs(t)), ref, 1e-8) << c << " " << t;
        }
    }
}
