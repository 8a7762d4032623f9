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

#ifndef BEAMREC_DATABASE_HPP
#define BEAMREC_DATABASE_HPP

#include "array.hpp"
#include "detail/text.hpp"
#include "scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

// 1-based grid cell of the discretized service area.
struct PositionLabel
{
    int x = 1;
    int y = 1;

    friend bool operator==(const PositionLabel &, const PositionLabel &) = default;
    friend auto operator<=>(const PositionLabel &, const PositionLabel &) = default;
};

struct GridSpec
{
    double delta_s = 5.0;
    int l_x = 11;
    int l_y = 11;
    double x0 = 10.0;
    double y0 = -25.0;

    // The far edge of the area gets its own label: l = 1 + round((end - start) / delta_s).
    static GridSpec from_area(const ServiceArea &area, double delta_s)
    {
        area.validate();
        if (!(delta_s > 0.0))
            throw std::invalid_argument("GridSpec: delta_s must be positive.");
        GridSpec g;
        g.delta_s = delta_s;
        g.x0 = area.x0;
        g.y0 = area.y0;
        g.l_x = 1 + static_cast<int>(std::floor((area.x_end - area.x0) / delta_s + 0.5));
        g.l_y = 1 + static_cast<int>(std::floor((area.y_end - area.y0) / delta_s + 0.5));
        return g;
    }

    int positions() const { return l_x * l_y; }

    bool contains(const PositionLabel &p) const { return p.x >= 1 && p.x <= l_x && p.y >= 1 && p.y <= l_y; }

    // Coordinate of the cell center.
    Coordinate center(const PositionLabel &p) const
    {
        return {x0 + (p.x - 1) * delta_s, y0 + (p.y - 1) * delta_s};
    }

    std::vector<PositionLabel> all_labels() const
    {
        std::vector<PositionLabel> out;
        out.reserve(static_cast<std::size_t>(positions()));
        for (int x = 1; x <= l_x; ++x)
            for (int y = 1; y <= l_y; ++y)
                out.push_back({x, y});
        return out;
    }
};

// Nearest label with round-half-up, clamped to the grid.
inline PositionLabel position_label(const GridSpec &grid, const ServiceArea &area, const Coordinate &g)
{
    if (!area.contains(g))
        throw std::invalid_argument("position_label: coordinate outside the service area.");
    const int px = 1 + static_cast<int>(std::floor((g.x - grid.x0) / grid.delta_s + 0.5));
    const int py = 1 + static_cast<int>(std::floor((g.y - grid.y0) / grid.delta_s + 0.5));
    return {std::clamp(px, 1, grid.l_x), std::clamp(py, 1, grid.l_y)};
}

struct MeasurementKey
{
    PositionLabel position;
    BeamIndex beam;

    friend bool operator==(const MeasurementKey &, const MeasurementKey &) = default;
    friend auto operator<=>(const MeasurementKey &, const MeasurementKey &) = default;
};

struct MeasurementRecord
{
    double mean_power = 0.0; // watts
    std::int64_t n_obs = 0;
};

/// Running-mean received power per (position, beam).
class MeasurementDatabase
{
public:
    using Map = std::map<MeasurementKey, MeasurementRecord>;

    void record(const PositionLabel &p, const BeamIndex &b, double power)
    {
        if (!(power >= 0.0))
            throw std::invalid_argument("MeasurementDatabase::record: power must be non-negative.");
        auto [it, inserted] = m_records.try_emplace(MeasurementKey{p, b});
        MeasurementRecord &rec = it->second;
        if (inserted)
        {
            rec.mean_power = power;
            rec.n_obs = 1;
            return;
        }
        const double n = static_cast<double>(rec.n_obs + 1);
        rec.mean_power = ((n - 1.0) / n) * rec.mean_power + (1.0 / n) * power;
        rec.n_obs += 1;
    }

    // Inserts a persisted record verbatim.
    void restore(const MeasurementKey &key, const MeasurementRecord &rec)
    {
        if (rec.n_obs < 1 || !(rec.mean_power >= 0.0))
            throw std::invalid_argument("MeasurementDatabase::restore: invalid record.");
        m_records[key] = rec;
    }

    const MeasurementRecord *find(const PositionLabel &p, const BeamIndex &b) const
    {
        const auto it = m_records.find(MeasurementKey{p, b});
        return it == m_records.end() ? nullptr : &it->second;
    }

    bool empty() const { return m_records.empty(); }
    std::size_t size() const { return m_records.size(); }
    const Map &records() const { return m_records; }

    std::set<PositionLabel> positions() const
    {
        std::set<PositionLabel> out;
        for (const auto &[key, rec] : m_records)
            out.insert(key.position);
        return out;
    }

    // Records at one position, in key order.
    std::vector<std::pair<BeamIndex, MeasurementRecord>> at(const PositionLabel &p) const
    {
        std::vector<std::pair<BeamIndex, MeasurementRecord>> out;
        auto it = m_records.lower_bound(MeasurementKey{p, BeamIndex{0, 0}});
        for (; it != m_records.end() && it->first.position == p; ++it)
            out.emplace_back(it->first.beam, it->second);
        return out;
    }

private:
    Map m_records;
};

/// Uniformly samples round(k_op * L_x * L_y) distinct labels.
///
/// The labels are a prefix of one seeded shuffle, so for a fixed seed a larger k_op
/// always yields a superset of a smaller one.
inline std::set<PositionLabel> sample_observed_positions(const GridSpec &grid, double k_op, std::uint64_t seed)
{
    if (!(k_op > 0.0) || k_op > 1.0)
        throw std::invalid_argument("sample_observed_positions: k_op must lie in (0, 1].");
    auto labels = grid.all_labels();
    std::mt19937_64 rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto count = static_cast<std::size_t>(std::lround(k_op * grid.positions()));
    return {labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(std::min(count, labels.size()))};
}

// Top-k flat beam indices by value, ties to the smaller flat index (lexicographic (i, j)).
inline std::vector<int> top_k_indices(const Eigen::VectorXd &values, int k)
{
    std::vector<int> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), 0);
    k = std::clamp(k, 0, static_cast<int>(order.size()));
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

struct SurveyOptions
{
    double top_fraction = 0.1;
    double p_t = 1.0;       // watts
    double noise_var = 0.0; // watts
    std::uint64_t seed = 0;
};

inline int survey_beam_count(int codebook_size, double top_fraction)
{
    if (!(top_fraction > 0.0) || top_fraction > 1.0)
        throw std::invalid_argument("survey: top_fraction must lie in (0, 1].");
    // the small slack keeps exact products such as 0.25 * 256 from rounding up
    return std::clamp(static_cast<int>(std::ceil(top_fraction * codebook_size - 1e-9)), 1, codebook_size);
}

/// Records the strongest beams of every reference coordinate that falls in an observed cell.
inline void ingest_survey(MeasurementDatabase &db, const Scene &scene, const ServiceArea &area, const Codebook &codebook,
                          const GridSpec &grid, const std::set<PositionLabel> &observed, const SurveyOptions &options)
{
    const int keep = survey_beam_count(codebook.size(), options.top_fraction);
    std::mt19937_64 rng(options.seed);
    for (const Coordinate &g : area.reference_coordinates())
    {
        const PositionLabel p = position_label(grid, area, g);
        if (!observed.contains(p))
            continue;
        const CVector h = assemble_channel(channel_at(scene, area, g), codebook.geometry());
        Eigen::VectorXd powers(codebook.size());
        if (options.noise_var == 0.0)
            powers = beam_powers(codebook, h, options.p_t);
        else
            for (int b = 0; b < codebook.size(); ++b)
                powers[b] = received_power(codebook.vector(b), h, options.p_t, options.noise_var, rng);
        for (int b : top_k_indices(powers, keep))
            db.record(p, codebook.beam(b), powers[b]);
    }
}

enum class PowerDomain
{
    linear_watts,
    db
};

inline constexpr double db_floor_watts = 1e-15;

inline double to_db(double watts) { return 10.0 * std::log10(std::max(watts, db_floor_watts)); }

/// Dense 4th-order tensor (l_x, l_y, c_theta, c_phi) with its observation mask.
/// Indices are 0-based; the last axis is contiguous.
class PowerTensor
{
public:
    PowerTensor() = default;
    PowerTensor(int l_x, int l_y, int c_theta, int c_phi, PowerDomain domain = PowerDomain::db)
        : m_shape{l_x, l_y, c_theta, c_phi}, m_domain(domain)
    {
        if (l_x < 1 || l_y < 1 || c_theta < 1 || c_phi < 1)
            throw std::invalid_argument("PowerTensor: all dimensions must be positive.");
        m_values.assign(size(), 0.0);
        m_mask.assign(size(), 0);
    }

    int l_x() const { return m_shape[0]; }
    int l_y() const { return m_shape[1]; }
    int c_theta() const { return m_shape[2]; }
    int c_phi() const { return m_shape[3]; }
    int beams() const { return m_shape[2] * m_shape[3]; }
    std::size_t size() const
    {
        return static_cast<std::size_t>(m_shape[0]) * m_shape[1] * m_shape[2] * m_shape[3];
    }
    PowerDomain domain() const { return m_domain; }

    std::size_t offset(int px, int py, int i, int j) const
    {
        return ((static_cast<std::size_t>(px) * m_shape[1] + py) * m_shape[2] + i) * m_shape[3] + j;
    }

    double value(int px, int py, int i, int j) const { return m_values[offset(px, py, i, j)]; }
    bool observed(int px, int py, int i, int j) const { return m_mask[offset(px, py, i, j)] != 0; }

    void set(int px, int py, int i, int j, double v, bool is_observed)
    {
        const auto k = offset(px, py, i, j);
        m_values[k] = is_observed ? v : 0.0;
        m_mask[k] = is_observed ? 1 : 0;
    }

    // Writes a value without touching the mask; used for predicted cells.
    void set_value(int px, int py, int i, int j, double v) { m_values[offset(px, py, i, j)] = v; }
    void set_observed(int px, int py, int i, int j, bool flag) { m_mask[offset(px, py, i, j)] = flag ? 1 : 0; }

    std::size_t observed_count() const
    {
        return static_cast<std::size_t>(std::count(m_mask.begin(), m_mask.end(), std::uint8_t{1}));
    }

    bool position_observed(int px, int py) const
    {
        const auto first = offset(px, py, 0, 0);
        return std::any_of(m_mask.begin() + static_cast<std::ptrdiff_t>(first),
                           m_mask.begin() + static_cast<std::ptrdiff_t>(first + beams()),
                           [](std::uint8_t m) { return m != 0; });
    }

    // Beam plane at one position as a c_theta x c_phi matrix.
    Eigen::MatrixXd beam_plane(int px, int py) const
    {
        Eigen::MatrixXd out(c_theta(), c_phi());
        for (int i = 0; i < c_theta(); ++i)
            for (int j = 0; j < c_phi(); ++j)
                out(i, j) = value(px, py, i, j);
        return out;
    }

    // Position plane for one beam as an l_x x l_y matrix.
    Eigen::MatrixXd position_plane(int i, int j) const
    {
        Eigen::MatrixXd out(l_x(), l_y());
        for (int px = 0; px < l_x(); ++px)
            for (int py = 0; py < l_y(); ++py)
                out(px, py) = value(px, py, i, j);
        return out;
    }

    const std::vector<double> &values() const { return m_values; }
    const std::vector<std::uint8_t> &mask() const { return m_mask; }

    friend bool operator==(const PowerTensor &, const PowerTensor &) = default;

private:
    std::array<int, 4> m_shape{0, 0, 0, 0};
    PowerDomain m_domain = PowerDomain::db;
    std::vector<double> m_values;
    std::vector<std::uint8_t> m_mask;
};

inline PowerTensor to_tensor(const MeasurementDatabase &db, const GridSpec &grid, const Codebook &codebook,
                             PowerDomain domain)
{
    PowerTensor t(grid.l_x, grid.l_y, codebook.c_theta(), codebook.c_phi(), domain);
    for (const auto &[key, rec] : db.records())
    {
        if (!grid.contains(key.position) || !codebook.contains(key.beam))
            throw std::invalid_argument("to_tensor: database record outside the grid or codebook.");
        const double v = domain == PowerDomain::db ? to_db(rec.mean_power) : rec.mean_power;
        t.set(key.position.x - 1, key.position.y - 1, key.beam.i - 1, key.beam.j - 1, v, true);
    }
    return t;
}

// ---------------------------------------------------------------------------------------
// CSV persistence

inline void save_measurements(const std::string &path, const MeasurementDatabase &db)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_measurements: cannot open " + path);
    os << "p_x,p_y,i,j,mean_power,n_obs\n";
    for (const auto &[key, rec] : db.records())
        os << key.position.x << ',' << key.position.y << ',' << key.beam.i << ',' << key.beam.j << ','
           << detail::to_text(rec.mean_power) << ',' << rec.n_obs << '\n';
    if (!os)
        throw std::runtime_error("save_measurements: write failed for " + path);
}

inline MeasurementDatabase load_measurements(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_measurements: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "p_x,p_y,i,j,mean_power,n_obs")
        throw std::runtime_error("load_measurements: unexpected header in " + path);
    MeasurementDatabase db;
    int line_no = 1;
    while (std::getline(is, line))
    {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 6)
            throw std::runtime_error("load_measurements: " + path + ":" + std::to_string(line_no) +
                                     ": expected 6 fields");
        const std::string where = path + ":" + std::to_string(line_no);
        MeasurementKey key{{detail::parse_number<int>(f[0], where), detail::parse_number<int>(f[1], where)},
                           {detail::parse_number<int>(f[2], where), detail::parse_number<int>(f[3], where)}};
        db.restore(key, {detail::parse_number<double>(f[4], where), detail::parse_number<std::int64_t>(f[5], where)});
    }
    return db;
}

/// Flat tensor dump: one row per cell, `observed` is 1 for measured cells.
inline void save_tensor(const std::string &path, const PowerTensor &t)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_tensor: cannot open " + path);
    os << "p_x,p_y,i,j," << (t.domain() == PowerDomain::db ? "value_dB" : "value_W") << ",observed\n";
    for (int px = 0; px < t.l_x(); ++px)
        for (int py = 0; py < t.l_y(); ++py)
            for (int i = 0; i < t.c_theta(); ++i)
                for (int j = 0; j < t.c_phi(); ++j)
                    os << px + 1 << ',' << py + 1 << ',' << i + 1 << ',' << j + 1 << ','
                       << detail::to_text(t.value(px, py, i, j)) << ',' << (t.observed(px, py, i, j) ? 1 : 0)
                       << '\n';
    if (!os)
        throw std::runtime_error("save_tensor: write failed for " + path);
}

inline PowerTensor load_tensor(const std::string &path, int l_x, int l_y, int c_theta, int c_phi)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_tensor: cannot open " + path);
    std::string line;
    std::getline(is, line);
    const auto header = detail::split(line, ',');
    if (header.size() != 6 || (header[4] != "value_dB" && header[4] != "value_W"))
        throw std::runtime_error("load_tensor: unexpected header in " + path);
    PowerTensor t(l_x, l_y, c_theta, c_phi, header[4] == "value_dB" ? PowerDomain::db : PowerDomain::linear_watts);
    int line_no = 1;
    std::size_t rows = 0;
    while (std::getline(is, line))
    {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto f = detail::split(line, ',');
        const std::string where = path + ":" + std::to_string(line_no);
        if (f.size() != 6)
            throw std::runtime_error("load_tensor: " + where + ": expected 6 fields");
        const int px = detail::parse_number<int>(f[0], where) - 1;
        const int py = detail::parse_number<int>(f[1], where) - 1;
        const int i = detail::parse_number<int>(f[2], where) - 1;
        const int j = detail::parse_number<int>(f[3], where) - 1;
        if (px < 0 || px >= l_x || py < 0 || py >= l_y || i < 0 || i >= c_theta || j < 0 || j >= c_phi)
            throw std::runtime_error("load_tensor: " + where + ": index out of range");
        t.set_value(px, py, i, j, detail::parse_number<double>(f[4], where));
        t.set_observed(px, py, i, j, detail::parse_number<int>(f[5], where) != 0);
        ++rows;
    }
    if (rows != t.size())
        throw std::runtime_error("load_tensor: " + path + " does not cover the full tensor");
    return t;
}

} // namespace beamrec

#endif
