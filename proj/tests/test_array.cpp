// SPDX-License-Identifier: Apache-2.0
//
// beamrec - position-aided mmWave beam recommendation by smooth tensor completion
// Copyright (C) 2026 The beamrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "beamrec/array.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace beamrec;
using std::numbers::pi;

TEST(QuantizedAngles, FirstElevationIsMinusHalfPi)
{
    const auto [theta, phi] = quantized_angles(16, 16);
    ASSERT_EQ(theta.size(), 16u);
    EXPECT_DOUBLE_EQ(theta.front(), -pi / 2);
    EXPECT_DOUBLE_EQ(theta[8], 0.0);
}

TEST(QuantizedAngles, SmallGrids)
{
    const auto [theta, phi] = quantized_angles(2, 4);
    ASSERT_EQ(theta.size(), 2u);
    EXPECT_DOUBLE_EQ(theta[0], -pi / 2);
    EXPECT_DOUBLE_EQ(theta[1], 0.0);
    ASSERT_EQ(phi.size(), 4u);
    EXPECT_DOUBLE_EQ(phi[0], -pi / 2);
    EXPECT_DOUBLE_EQ(phi[1], -pi / 4);
    EXPECT_DOUBLE_EQ(phi[2], 0.0);
    EXPECT_DOUBLE_EQ(phi[3], pi / 4);
}

TEST(QuantizedAngles, SortedAndHalfOpen)
{
    for (int c : {1, 3, 7, 16, 33})
    {
        const auto g = quantized_grid(c);
        for (std::size_t k = 0; k < g.size(); ++k)
        {
            EXPECT_GE(g[k], -pi / 2);
            EXPECT_LT(g[k], pi / 2);
            if (k > 0)
            {
                EXPECT_LT(g[k - 1], g[k]);
            }
        }
    }
}

TEST(QuantizedAngles, RejectsEmptyGrid)
{
    EXPECT_THROW(quantized_angles(0, 4), std::invalid_argument);
    EXPECT_THROW(quantized_angles(4, 0), std::invalid_argument);
}

TEST(SteeringVector, BroadsideIsFlat)
{
    const ArrayGeometry g{4, 3, 0.5};
    for (double phi : {-pi / 2, -0.3, 0.0, 1.2})
    {
        const CVector a = steering_vector(g, 0.0, phi);
        for (Eigen::Index k = 0; k < a.size(); ++k)
        {
            EXPECT_NEAR(a[k].real(), 1.0 / std::sqrt(12.0), 1e-15);
            EXPECT_NEAR(a[k].imag(), 0.0, 1e-15);
        }
    }
}

TEST(SteeringVector, UnitNorm)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-pi / 2, pi / 2);
    const ArrayGeometry g{16, 16, 0.5};
    for (int k = 0; k < 200; ++k)
        EXPECT_NEAR(steering_vector(g, ang(rng), ang(rng)).norm(), 1.0, 1e-12);
}

// Element layout: y factor (outer) times x factor (inner).
TEST(SteeringVector, KroneckerOrderTwoByTwo)
{
    const double eps = 1e-6;
    const double theta = pi / 2 - eps;
    const ArrayGeometry g{2, 2, 0.5};
    const CVector a = steering_vector(g, theta, 0.0);
    const double omega_x = pi * std::sin(theta); // cos(0) = 1, sin(0) = 0 so omega_y = 0
    const cplx ex = std::polar(1.0, omega_x);
    const cplx expected[4] = {0.5, 0.5 * ex, 0.5, 0.5 * ex};
    for (int k = 0; k < 4; ++k)
        EXPECT_NEAR(std::abs(a[k] - expected[k]), 0.0, 1e-14) << "element " << k;
    EXPECT_NEAR(omega_x, pi, 1e-9);
}

TEST(SteeringVector, YFactorIsOuter)
{
    // phi = pi/2 puts all phase progression on the y axis: entry ny * n_x + nx depends on ny only.
    const ArrayGeometry g{3, 2, 0.5};
    const double theta = 0.4;
    const CVector a = steering_vector(g, theta, pi / 2);
    const double omega_y = pi * std::sin(theta);
    for (int ny = 0; ny < 2; ++ny)
        for (int nx = 0; nx < 3; ++nx)
            EXPECT_NEAR(std::abs(a[ny * 3 + nx] - std::polar(1.0 / std::sqrt(6.0), ny * omega_y)), 0.0, 1e-12);
}

TEST(Codebook, DefaultSize)
{
    const Codebook cb = build_codebook({16, 16, 0.5}, 16, 16);
    EXPECT_EQ(cb.size(), 256);
    EXPECT_EQ(cb.matrix().rows(), 256);
    EXPECT_EQ(cb.matrix().cols(), 256);
}

TEST(Codebook, SingleBeam)
{
    const Codebook cb = build_codebook({4, 4, 0.5}, 1, 1);
    ASSERT_EQ(cb.size(), 1);
    const CVector &w = cb.vector(BeamIndex{1, 1});
    EXPECT_DOUBLE_EQ(cb.theta(1), -pi / 2);
    EXPECT_NEAR(w.norm(), 1.0, 1e-12);
}

TEST(Codebook, VectorsMatchSteeringAndAreUnitNorm)
{
    const ArrayGeometry g{8, 4, 0.5};
    const Codebook cb = build_codebook(g, 5, 7);
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 7; ++j)
        {
            const CVector &w = cb.vector(BeamIndex{i, j});
            EXPECT_NEAR(w.norm(), 1.0, 1e-12);
            EXPECT_EQ(w, steering_vector(g, cb.theta(i), cb.phi(j)));
            EXPECT_EQ(cb.matrix().col(cb.flat({i, j})), w);
        }
}

TEST(Codebook, FlatIndexRoundTrip)
{
    const Codebook cb = build_codebook({2, 2, 0.5}, 3, 5);
    for (int f = 0; f < cb.size(); ++f)
        EXPECT_EQ(cb.flat(cb.beam(f)), f);
    EXPECT_EQ(cb.flat({1, 2}), 1);
    EXPECT_EQ(cb.flat({2, 1}), 5);
    EXPECT_THROW(cb.flat({0, 1}), std::out_of_range);
    EXPECT_THROW(cb.beam(15), std::out_of_range);
}

TEST(ReceivedPower, MatchedAndOrthogonal)
{
    const ArrayGeometry g{4, 4, 0.5};
    const CVector w = steering_vector(g, 0.3, -0.2);
    EXPECT_NEAR(received_power(w, w, 1.0), 1.0, 1e-12);

    CVector h = steering_vector(g, -0.7, 0.9);
    h -= w * w.dot(h); // project out w
    EXPECT_NEAR(received_power(w, h, 1.0), 0.0, 1e-24);

    std::mt19937_64 rng(1);
    EXPECT_NEAR(received_power(w, h, 1.0, 0.0, rng), 0.0, 1e-24);
}

TEST(ReceivedPower, LinearInTransmitPower)
{
    const ArrayGeometry g{4, 4, 0.5};
    const CVector w = steering_vector(g, 0.3, -0.2);
    const CVector h = steering_vector(g, 0.25, -0.1) * cplx(2.0, -1.0);
    const double base = received_power(w, h, 1.0);
    for (double p : {0.0, 0.5, 3.0, 1e3})
        EXPECT_NEAR(received_power(w, h, p), p * base, 1e-12 * std::max(1.0, p * base));
}

TEST(ReceivedPower, InvariantUnderGlobalPhase)
{
    const ArrayGeometry g{4, 4, 0.5};
    const CVector w = steering_vector(g, 0.3, -0.2);
    const CVector h = steering_vector(g, 0.1, 0.4) + 0.5 * steering_vector(g, -0.6, 0.0);
    const double ref = received_power(w, h, 2.0);
    for (double phase : {0.3, 1.7, -2.9})
        EXPECT_NEAR(received_power(w, CVector(h * std::polar(1.0, phase)), 2.0), ref, 1e-12);
}

TEST(ReceivedPower, DimensionMismatch)
{
    const CVector w = CVector::Ones(4) / 2.0;
    const CVector h = CVector::Ones(5);
    std::mt19937_64 rng(0);
    EXPECT_THROW(received_power(w, h, 1.0), std::invalid_argument);
    EXPECT_THROW(received_power(w, h, 1.0, 0.1, rng), std::invalid_argument);
}

TEST(ReceivedPower, NoisyIsSeededAndCentered)
{
    const ArrayGeometry g{4, 4, 0.5};
    const CVector w = steering_vector(g, 0.2, 0.2);
    const CVector h = 3.0 * w;
    std::mt19937_64 a(5), b(5);
    EXPECT_EQ(received_power(w, h, 1.0, 0.5, a), received_power(w, h, 1.0, 0.5, b));

    // E|s + v|^2 = |s|^2 + sigma^2
    std::mt19937_64 rng(9);
    double acc = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k)
        acc += received_power(w, h, 1.0, 0.5, rng);
    EXPECT_NEAR(acc / n, 9.5, 0.05);
}

TEST(BeamPowers, MatchesPerBeamEvaluation)
{
    const Codebook cb = build_codebook({4, 4, 0.5}, 4, 4);
    const CVector h = steering_vector(cb.geometry(), 0.35, -0.4) * 4.0;
    const Eigen::VectorXd p = beam_powers(cb, h, 0.7);
    for (int f = 0; f < cb.size(); ++f)
        EXPECT_NEAR(p[f], received_power(cb.vector(f), h, 0.7), 1e-12);
}
