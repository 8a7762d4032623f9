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

#ifndef BEAMREC_ARRAY_HPP
#define BEAMREC_ARRAY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace beamrec
{

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

// Uniform planar array at the base station. Element (ny, nx) sits at index ny * n_x + nx.
struct ArrayGeometry
{
    int n_x = 16;
    int n_y = 16;
    double spacing = 0.5; // element spacing in wavelengths

    int n_r() const { return n_x * n_y; }

    void validate() const
    {
        if (n_x < 1 || n_y < 1)
            throw std::invalid_argument("ArrayGeometry: antenna counts must be positive.");
        if (!(spacing > 0.0))
            throw std::invalid_argument("ArrayGeometry: element spacing must be positive.");
    }
};

// 1-based (elevation, azimuth) codeword index.
struct BeamIndex
{
    int i = 1;
    int j = 1;

    friend bool operator==(const BeamIndex &, const BeamIndex &) = default;
    friend auto operator<=>(const BeamIndex &, const BeamIndex &) = default;
};

// Uniformly quantized grid over [-pi/2, pi/2): value k (1-based) is -pi/2 + (k-1) * pi / size.
inline std::vector<double> quantized_grid(int size)
{
    if (size < 1)
        throw std::invalid_argument("quantized_grid: grid size must be at least 1.");
    std::vector<double> grid(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k)
        grid[static_cast<std::size_t>(k)] = -std::numbers::pi / 2.0 + k * std::numbers::pi / size;
    return grid;
}

inline std::pair<std::vector<double>, std::vector<double>> quantized_angles(int c_theta, int c_phi)
{
    if (c_theta < 1 || c_phi < 1)
        throw std::invalid_argument("quantized_angles: grid sizes must be at least 1.");
    return {quantized_grid(c_theta), quantized_grid(c_phi)};
}

/// Array response toward (theta, phi), normalized to unit norm.
///
/// Layout is the Kronecker product (y-axis factor) x (x-axis factor), so entry
/// ny * n_x + nx carries exp(j (ny * Omega_y + nx * Omega_x)) / sqrt(n_r) with
/// Omega_x = 2 pi d sin(theta) cos(phi), Omega_y = 2 pi d sin(theta) sin(phi).
/// For half-wavelength spacing 2 pi d = pi.
inline CVector steering_vector(const ArrayGeometry &geometry, double theta, double phi)
{
    geometry.validate();
    const double k = 2.0 * std::numbers::pi * geometry.spacing;
    const double omega_x = k * std::sin(theta) * std::cos(phi);
    const double omega_y = k * std::sin(theta) * std::sin(phi);
    const double scale = 1.0 / std::sqrt(static_cast<double>(geometry.n_r()));

    CVector a(geometry.n_r());
    for (int ny = 0; ny < geometry.n_y; ++ny)
        for (int nx = 0; nx < geometry.n_x; ++nx)
            a[ny * geometry.n_x + nx] = std::polar(scale, ny * omega_y + nx * omega_x);
    return a;
}

// Receive codebook W = { a(theta_i, phi_j) }. Beams are stored row-major in (i, j).
class Codebook
{
public:
    Codebook() = default;

    Codebook(const ArrayGeometry &geometry, int c_theta, int c_phi)
        : m_geometry(geometry), m_c_theta(c_theta), m_c_phi(c_phi)
    {
        geometry.validate();
        auto [thetas, phis] = quantized_angles(c_theta, c_phi);
        m_thetas = std::move(thetas);
        m_phis = std::move(phis);
        m_vectors.reserve(static_cast<std::size_t>(c_theta * c_phi));
        m_matrix.resize(geometry.n_r(), c_theta * c_phi);
        for (int i = 1; i <= c_theta; ++i)
            for (int j = 1; j <= c_phi; ++j)
            {
                m_vectors.push_back(steering_vector(geometry, theta(i), phi(j)));
                m_matrix.col(static_cast<Eigen::Index>(m_vectors.size() - 1)) = m_vectors.back();
            }
    }

    int c_theta() const { return m_c_theta; }
    int c_phi() const { return m_c_phi; }
    int size() const { return m_c_theta * m_c_phi; }
    const ArrayGeometry &geometry() const { return m_geometry; }

    double theta(int i) const { return m_thetas.at(static_cast<std::size_t>(i - 1)); }
    double phi(int j) const { return m_phis.at(static_cast<std::size_t>(j - 1)); }

    bool contains(const BeamIndex &b) const
    {
        return b.i >= 1 && b.i <= m_c_theta && b.j >= 1 && b.j <= m_c_phi;
    }

    // Row-major flat position of a beam, 0-based.
    int flat(const BeamIndex &b) const
    {
        if (!contains(b))
            throw std::out_of_range("Codebook: beam index out of range.");
        return (b.i - 1) * m_c_phi + (b.j - 1);
    }

    BeamIndex beam(int flat_index) const
    {
        if (flat_index < 0 || flat_index >= size())
            throw std::out_of_range("Codebook: flat index out of range.");
        return {flat_index / m_c_phi + 1, flat_index % m_c_phi + 1};
    }

    const CVector &vector(const BeamIndex &b) const { return m_vectors[static_cast<std::size_t>(flat(b))]; }
    const CVector &vector(int flat_index) const { return m_vectors.at(static_cast<std::size_t>(flat_index)); }

    // n_r x |W| matrix whose columns are the codewords in flat order.
    const Eigen::MatrixXcd &matrix() const { return m_matrix; }

private:
    ArrayGeometry m_geometry;
    int m_c_theta = 0;
    int m_c_phi = 0;
    std::vector<double> m_thetas;
    std::vector<double> m_phis;
    std::vector<CVector> m_vectors;
    Eigen::MatrixXcd m_matrix;
};

inline Codebook build_codebook(const ArrayGeometry &geometry, int c_theta, int c_phi)
{
    return Codebook(geometry, c_theta, c_phi);
}

// Noiseless beamformed power p_t * |w^H h|^2.
inline double received_power(const CVector &w, const CVector &h, double p_t)
{
    if (w.size() != h.size())
        throw std::invalid_argument("received_power: beamformer and channel dimensions differ.");
    return p_t * std::norm(w.dot(h)); // Eigen's dot() conjugates the first operand
}

// Noiseless power of every codeword, in flat beam order.
inline Eigen::VectorXd beam_powers(const Codebook &codebook, const CVector &h, double p_t)
{
    if (codebook.matrix().rows() != h.size())
        throw std::invalid_argument("beam_powers: channel dimension does not match the codebook.");
    const CVector response = codebook.matrix().adjoint() * h;
    return p_t * response.cwiseAbs2();
}

/// |sqrt(p_t) w^H h + v|^2 with v ~ CN(0, noise_var) drawn from `rng`.
template <class Rng>
double received_power(const CVector &w, const CVector &h, double p_t, double noise_var, Rng &rng)
{
    if (w.size() != h.size())
        throw std::invalid_argument("received_power: beamformer and channel dimensions differ.");
    if (noise_var < 0.0)
        throw std::invalid_argument("received_power: noise variance must be non-negative.");
    if (noise_var == 0.0)
        return p_t * std::norm(w.dot(h));
    const cplx signal = std::sqrt(p_t) * w.dot(h);
    std::normal_distribution<double> n01(0.0, std::sqrt(noise_var / 2.0));
    const cplx noise(n01(rng), n01(rng));
    return std::norm(signal + noise);
}

} // namespace beamrec

#endif
