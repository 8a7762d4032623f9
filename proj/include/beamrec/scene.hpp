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

#ifndef BEAMREC_SCENE_HPP
#define BEAMREC_SCENE_HPP

#include "array.hpp"
#include "detail/text.hpp"

#include <Eigen/Dense>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

inline constexpr double speed_of_light = 299'792'458.0;

struct Coordinate
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Coordinate &, const Coordinate &) = default;
};

// Rectangular service area of one base station.
struct ServiceArea
{
    double x0 = 10.0;
    double x_end = 60.0;
    double y0 = -25.0;
    double y_end = 25.0;
    Eigen::Vector3d bs_position{0.0, 0.0, 10.0};
    double ue_height = 1.5;
    int ref_grid_n = 51; // reference coordinates per axis

    void validate() const
    {
        if (!(x0 < x_end) || !(y0 < y_end))
            throw std::invalid_argument("ServiceArea: bounds must satisfy x0 < x_end and y0 < y_end.");
        if (ref_grid_n < 2)
            throw std::invalid_argument("ServiceArea: ref_grid_n must be at least 2.");
    }

    bool contains(const Coordinate &g) const
    {
        return g.x >= x0 && g.x <= x_end && g.y >= y0 && g.y <= y_end;
    }

    Eigen::Vector3d ue_position(const Coordinate &g) const { return {g.x, g.y, ue_height}; }

    double bs_distance(const Coordinate &g) const { return (ue_position(g) - bs_position).norm(); }

    // ref_grid_n x ref_grid_n uniformly spaced coordinates, x-major.
    std::vector<Coordinate> reference_coordinates() const
    {
        validate();
        std::vector<Coordinate> out;
        out.reserve(static_cast<std::size_t>(ref_grid_n * ref_grid_n));
        const double dx = (x_end - x0) / (ref_grid_n - 1);
        const double dy = (y_end - y0) / (ref_grid_n - 1);
        for (int a = 0; a < ref_grid_n; ++a)
            for (int b = 0; b < ref_grid_n; ++b)
                out.push_back({a + 1 == ref_grid_n ? x_end : x0 + a * dx, b + 1 == ref_grid_n ? y_end : y0 + b * dy});
        return out;
    }
};

struct Cluster
{
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double spread = 1.0;       // meters
    double base_gain_db = 0.0; // reflection loss relative to free space
};

// Path l of every channel bounces once off scatterer l, a sphere whose radius is the
// cluster spread; the bounce point moves over the sphere with the UE.
struct Scatterer
{
    int cluster = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct ChannelInstance
{
    Coordinate coordinate;
    std::vector<cplx> gains;
    std::vector<double> elevations;
    std::vector<double> azimuths;

    std::size_t path_count() const { return gains.size(); }
};

/// Deterministic geometric propagation environment.
///
/// Each channel carries an optional line-of-sight ray plus one single-bounce ray per
/// scatterer, so arrival angles drift smoothly as the UE moves. Amplitudes follow free-space loss on the total ray length, scaled by the
/// cluster gain and a lognormal shadowing field that is smooth in the UE position.
/// The field is a Gaussian-kernel interpolation of i.i.d. normal values on a square
/// lattice with pitch `shadowing_corr_m`; the lattice is regenerated from `seed`.
class Scene
{
public:
    std::vector<Cluster> clusters;
    std::vector<Scatterer> scatterers;
    int n_paths = 1;
    std::uint64_t seed = 0;
    double shadowing_corr_m = 10.0;
    double shadowing_std_db = 4.0;
    bool line_of_sight = false;
    double carrier_hz = 58.68e9;

    double wavelength() const { return speed_of_light / carrier_hz; }

    void validate() const
    {
        if (n_paths < 1)
            throw std::invalid_argument("Scene: n_paths must be at least 1.");
        if (clusters.empty())
            throw std::invalid_argument("Scene: at least one cluster is required.");
        for (const auto &c : clusters)
            if (!(c.spread > 0.0))
                throw std::invalid_argument("Scene: cluster spread must be positive.");
        const std::size_t expected = static_cast<std::size_t>(n_paths - (line_of_sight ? 1 : 0));
        if (scatterers.size() != expected)
            throw std::invalid_argument("Scene: scatterer count does not match n_paths.");
        for (const auto &s : scatterers)
            if (s.cluster < 0 || static_cast<std::size_t>(s.cluster) >= clusters.size())
                throw std::invalid_argument("Scene: scatterer refers to an unknown cluster.");
        if (!(shadowing_corr_m > 0.0) || !(shadowing_std_db >= 0.0) || !(carrier_hz > 0.0))
            throw std::invalid_argument("Scene: shadowing and carrier parameters must be positive.");
    }

    // Builds the shadowing lattices. Must be called after the public fields change.
    void prepare(const ServiceArea &area)
    {
        validate();
        area.validate();
        const double pitch = shadowing_corr_m;
        m_lattice_x0 = area.x0 - 3.0 * pitch;
        m_lattice_y0 = area.y0 - 3.0 * pitch;
        m_lattice_nx = static_cast<int>(std::ceil((area.x_end - area.x0) / pitch)) + 7;
        m_lattice_ny = static_cast<int>(std::ceil((area.y_end - area.y0) / pitch)) + 7;
        // one field per cluster, plus one for the line-of-sight ray
        const int fields = static_cast<int>(clusters.size()) + 1;
        m_lattice.assign(static_cast<std::size_t>(fields * m_lattice_nx * m_lattice_ny), 0.0);
        for (int f = 0; f < fields; ++f)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              0x5eedu, static_cast<std::uint32_t>(f)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> n01;
            for (int a = 0; a < m_lattice_nx; ++a)
                for (int b = 0; b < m_lattice_ny; ++b)
                    m_lattice[lattice_slot(f, a, b)] = n01(rng);
        }
        m_prepared = true;
    }

    bool prepared() const { return m_prepared; }

    // Shadowing in dB for field f (cluster index, or clusters.size() for LOS).
    double shadowing_db(int field, const Coordinate &g) const
    {
        if (!m_prepared)
            throw std::logic_error("Scene: prepare() has not been called.");
        if (shadowing_std_db == 0.0)
            return 0.0;
        const double pitch = shadowing_corr_m;
        const double fx = (g.x - m_lattice_x0) / pitch;
        const double fy = (g.y - m_lattice_y0) / pitch;
        const int ax = static_cast<int>(std::floor(fx));
        const int ay = static_cast<int>(std::floor(fy));
        double weighted = 0.0;
        double weight_sq = 0.0;
        for (int a = ax - 2; a <= ax + 3; ++a)
            for (int b = ay - 2; b <= ay + 3; ++b)
            {
                if (a < 0 || b < 0 || a >= m_lattice_nx || b >= m_lattice_ny)
                    continue;
                const double dx = fx - a;
                const double dy = fy - b;
                const double w = std::exp(-0.5 * (dx * dx + dy * dy));
                weighted += w * m_lattice[lattice_slot(field, a, b)];
                weight_sq += w * w;
            }
        return shadowing_std_db * weighted / std::sqrt(weight_sq);
    }

private:
    std::size_t lattice_slot(int field, int a, int b) const
    {
        return static_cast<std::size_t>((field * m_lattice_nx + a) * m_lattice_ny + b);
    }

    std::vector<double> m_lattice;
    double m_lattice_x0 = 0.0;
    double m_lattice_y0 = 0.0;
    int m_lattice_nx = 0;
    int m_lattice_ny = 0;
    bool m_prepared = false;
};

struct SceneOptions
{
    int n_clusters = 8;
    int n_paths = 8;
    bool line_of_sight = false;
    double cluster_spread_m = 5.0;
    double min_gain_db = -10.0; // cluster reflection gains drawn uniformly in [min, max]
    double max_gain_db = 0.0;
    double shadowing_corr_m = 10.0;
    double shadowing_std_db = 4.0;
    double carrier_hz = 58.68e9;
};

/// Draws cluster centers uniformly in the area box (height 0 .. BS height) and one
/// scatterer per non-LOS path, assigned to clusters round-robin.
inline Scene generate_scene(const ServiceArea &area, const SceneOptions &options, std::uint64_t seed)
{
    area.validate();
    if (options.n_clusters < 1)
        throw std::invalid_argument("generate_scene: n_clusters must be at least 1.");
    if (options.n_paths < 1)
        throw std::invalid_argument("generate_scene: n_paths must be at least 1.");
    if (options.min_gain_db > options.max_gain_db)
        throw std::invalid_argument("generate_scene: min_gain_db exceeds max_gain_db.");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(area.x0, area.x_end);
    std::uniform_real_distribution<double> uy(area.y0, area.y_end);
    std::uniform_real_distribution<double> uz(0.0, area.bs_position.z());
    std::uniform_real_distribution<double> ugain(options.min_gain_db, options.max_gain_db);
    std::normal_distribution<double> n01;

    Scene scene;
    scene.seed = seed;
    scene.n_paths = options.n_paths;
    scene.line_of_sight = options.line_of_sight;
    scene.shadowing_corr_m = options.shadowing_corr_m;
    scene.shadowing_std_db = options.shadowing_std_db;
    scene.carrier_hz = options.carrier_hz;

    for (int c = 0; c < options.n_clusters; ++c)
    {
        Cluster cl;
        cl.center = {ux(rng), uy(rng), uz(rng)};
        cl.spread = options.cluster_spread_m;
        cl.base_gain_db = ugain(rng);
        scene.clusters.push_back(cl);
    }
    const int reflected = options.n_paths - (options.line_of_sight ? 1 : 0);
    for (int l = 0; l < reflected; ++l)
    {
        Scatterer s;
        s.cluster = l % options.n_clusters;
        const Cluster &cl = scene.clusters[static_cast<std::size_t>(s.cluster)];
        s.position = cl.center + cl.spread * Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
        s.position.z() = std::clamp(s.position.z(), 0.0, area.bs_position.z());
        scene.scatterers.push_back(s);
    }
    scene.prepare(area);
    return scene;
}

/// Angles (theta, phi) in [-pi/2, pi/2) of a world-frame arrival direction.
///
/// The array faces +x with its x-axis along -z (down) and its y-axis along +y, so a
/// direction d maps to sin(theta)cos(phi) = -d_z, sin(theta)sin(phi) = d_y.
inline std::pair<double, double> arrival_angles(const Eigen::Vector3d &direction)
{
    const Eigen::Vector3d d = direction.normalized();
    const double u = -d.z();
    const double v = d.y();
    const double r = std::min(1.0, std::hypot(u, v));
    if (r == 0.0)
        return {0.0, 0.0};
    if (u > 0.0)
        return {std::asin(r), std::atan(v / u)};
    if (u < 0.0)
        return {-std::asin(r), std::atan(v / u)};
    return {-std::asin(r) * (v > 0.0 ? 1.0 : -1.0), -std::numbers::pi / 2.0};
}

// A scatterer is a sphere of radius `radius` around `center`; the ray bounces off the
// surface point whose normal bisects the directions to the BS and the UE.
inline Eigen::Vector3d reflection_point(const Eigen::Vector3d &center, double radius,
                                        const Eigen::Vector3d &bs, const Eigen::Vector3d &ue)
{
    const Eigen::Vector3d normal = (bs - center).normalized() + (ue - center).normalized();
    const double n = normal.norm();
    if (!(n > 1e-12))
        return center;
    return center + (radius / n) * normal;
}

inline ChannelInstance channel_at(const Scene &scene, const ServiceArea &area, const Coordinate &g)
{
    if (!area.contains(g))
        throw std::invalid_argument("channel_at: coordinate outside the service area.");
    const double wavelength = scene.wavelength();
    const Eigen::Vector3d bs = area.bs_position;
    const Eigen::Vector3d ue = area.ue_position(g);

    ChannelInstance out;
    out.coordinate = g;
    auto add_path = [&](const Eigen::Vector3d &arrival_point, double length, double gain_db) {
        const double amplitude = wavelength / (4.0 * std::numbers::pi * length) * std::pow(10.0, gain_db / 20.0);
        const double phase = std::fmod(2.0 * std::numbers::pi * length / wavelength, 2.0 * std::numbers::pi);
        const auto [theta, phi] = arrival_angles(arrival_point - bs);
        out.gains.push_back(std::polar(amplitude, phase));
        out.elevations.push_back(theta);
        out.azimuths.push_back(phi);
    };

    if (scene.line_of_sight)
        add_path(ue, (ue - bs).norm(), scene.shadowing_db(static_cast<int>(scene.clusters.size()), g));
    for (const auto &s : scene.scatterers)
    {
        const Cluster &cl = scene.clusters[static_cast<std::size_t>(s.cluster)];
        const Eigen::Vector3d point = reflection_point(s.position, cl.spread, bs, ue);
        const double length = (point - bs).norm() + (ue - point).norm();
        add_path(point, length, cl.base_gain_db + scene.shadowing_db(s.cluster, g));
    }
    return out;
}

// h = sqrt(N_r) * sum_l alpha_l a(theta_l, phi_l)
inline CVector assemble_channel(const ChannelInstance &instance, const ArrayGeometry &geometry)
{
    CVector h = CVector::Zero(geometry.n_r());
    for (std::size_t l = 0; l < instance.path_count(); ++l)
        h += instance.gains[l] * steering_vector(geometry, instance.elevations[l], instance.azimuths[l]);
    return std::sqrt(static_cast<double>(geometry.n_r())) * h;
}

// ---------------------------------------------------------------------------------------
// Scene files: INI-style key/value text holding the area, scene scalars, clusters, and
// scatterers. Doubles are written in shortest round-trip form so reloads are exact.

inline void save_scene(const std::string &path, const Scene &scene, const ServiceArea &area)
{
    using detail::to_text;
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_scene: cannot open " + path);
    os << "[area]\n"
       << "x0=" << to_text(area.x0) << "\n"
       << "x_end=" << to_text(area.x_end) << "\n"
       << "y0=" << to_text(area.y0) << "\n"
       << "y_end=" << to_text(area.y_end) << "\n"
       << "bs_x=" << to_text(area.bs_position.x()) << "\n"
       << "bs_y=" << to_text(area.bs_position.y()) << "\n"
       << "bs_z=" << to_text(area.bs_position.z()) << "\n"
       << "ue_height=" << to_text(area.ue_height) << "\n"
       << "ref_grid_n=" << area.ref_grid_n << "\n\n"
       << "[scene]\n"
       << "seed=" << scene.seed << "\n"
       << "n_paths=" << scene.n_paths << "\n"
       << "n_clusters=" << scene.clusters.size() << "\n"
       << "line_of_sight=" << (scene.line_of_sight ? "true" : "false") << "\n"
       << "shadowing_corr_m=" << to_text(scene.shadowing_corr_m) << "\n"
       << "shadowing_std_db=" << to_text(scene.shadowing_std_db) << "\n"
       << "carrier_hz=" << to_text(scene.carrier_hz) << "\n";
    for (std::size_t c = 0; c < scene.clusters.size(); ++c)
    {
        const auto &cl = scene.clusters[c];
        os << "\n[cluster_" << c << "]\n"
           << "x=" << to_text(cl.center.x()) << "\n"
           << "y=" << to_text(cl.center.y()) << "\n"
           << "z=" << to_text(cl.center.z()) << "\n"
           << "spread=" << to_text(cl.spread) << "\n"
           << "base_gain_db=" << to_text(cl.base_gain_db) << "\n";
    }
    for (std::size_t s = 0; s < scene.scatterers.size(); ++s)
    {
        const auto &sc = scene.scatterers[s];
        os << "\n[scatterer_" << s << "]\n"
           << "cluster=" << sc.cluster << "\n"
           << "x=" << to_text(sc.position.x()) << "\n"
           << "y=" << to_text(sc.position.y()) << "\n"
           << "z=" << to_text(sc.position.z()) << "\n";
    }
    if (!os)
        throw std::runtime_error("save_scene: write failed for " + path);
}

struct LoadedScene
{
    Scene scene;
    ServiceArea area;
};

inline LoadedScene load_scene(const std::string &path)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try
    {
        pt::read_ini(path, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw std::runtime_error("load_scene: " + std::string(e.what()));
    }

    auto number = [&](const std::string &key) {
        const auto value = tree.get_optional<std::string>(key);
        if (!value)
            throw std::runtime_error("load_scene: " + path + " is missing '" + key + "'");
        return detail::parse_number<double>(*value, key);
    };
    auto integer = [&](const std::string &key) {
        const auto value = tree.get_optional<std::string>(key);
        if (!value)
            throw std::runtime_error("load_scene: " + path + " is missing '" + key + "'");
        return detail::parse_number<long long>(*value, key);
    };

    LoadedScene out;
    ServiceArea &area = out.area;
    area.x0 = number("area.x0");
    area.x_end = number("area.x_end");
    area.y0 = number("area.y0");
    area.y_end = number("area.y_end");
    area.bs_position = {number("area.bs_x"), number("area.bs_y"), number("area.bs_z")};
    area.ue_height = number("area.ue_height");
    area.ref_grid_n = static_cast<int>(integer("area.ref_grid_n"));

    Scene &scene = out.scene;
    scene.seed = detail::parse_number<std::uint64_t>(tree.get<std::string>("scene.seed", ""), "scene.seed");
    scene.n_paths = static_cast<int>(integer("scene.n_paths"));
    scene.line_of_sight = tree.get<std::string>("scene.line_of_sight", "false") == "true";
    scene.shadowing_corr_m = number("scene.shadowing_corr_m");
    scene.shadowing_std_db = number("scene.shadowing_std_db");
    scene.carrier_hz = number("scene.carrier_hz");
    const auto n_clusters = integer("scene.n_clusters");
    for (long long c = 0; c < n_clusters; ++c)
    {
        const std::string sec = "cluster_" + std::to_string(c) + ".";
        Cluster cl;
        cl.center = {number(sec + "x"), number(sec + "y"), number(sec + "z")};
        cl.spread = number(sec + "spread");
        cl.base_gain_db = number(sec + "base_gain_db");
        scene.clusters.push_back(cl);
    }
    const int reflected = scene.n_paths - (scene.line_of_sight ? 1 : 0);
    for (int s = 0; s < reflected; ++s)
    {
        const std::string sec = "scatterer_" + std::to_string(s) + ".";
        Scatterer sc;
        sc.cluster = static_cast<int>(integer(sec + "cluster"));
        sc.position = {number(sec + "x"), number(sec + "y"), number(sec + "z")};
        scene.scatterers.push_back(sc);
    }
    scene.prepare(area);
    return out;
}

} // namespace beamrec

#endif
