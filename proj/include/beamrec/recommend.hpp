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

#ifndef BEAMREC_RECOMMEND_HPP
#define BEAMREC_RECOMMEND_HPP

#include "completion.hpp"
#include "database.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beamrec
{

enum class RecommendationSource
{
    tensor_completion,
    fingerprint,
    exhaustive
};

inline std::string_view to_string(RecommendationSource s)
{
    switch (s)
    {
    case RecommendationSource::tensor_completion:
        return "tc";
    case RecommendationSource::fingerprint:
        return "fingerprint";
    case RecommendationSource::exhaustive:
        return "exhaustive";
    }
    return "unknown";
}

inline RecommendationSource source_from_string(std::string_view s)
{
    if (s == "tc")
        return RecommendationSource::tensor_completion;
    if (s == "fingerprint")
        return RecommendationSource::fingerprint;
    if (s == "exhaustive")
        return RecommendationSource::exhaustive;
    throw std::invalid_argument("unknown recommendation source '" + std::string(s) + "'");
}

/// Ordered list of beams to train at one position. `scores` holds the value each
/// beam was ranked by (predicted dB for completion, stored mean dB for fingerprint).
struct RecommendationSet
{
    PositionLabel position;
    std::vector<BeamIndex> beams;
    std::vector<double> scores;
    RecommendationSource source = RecommendationSource::tensor_completion;

    // The first n beams; recommendation lists are nested, so this is the set for n_tr = n.
    std::vector<BeamIndex> prefix(std::size_t n) const
    {
        return {beams.begin(), beams.begin() + static_cast<std::ptrdiff_t>(std::min(n, beams.size()))};
    }
};

/// Greedy beam subset selection: n_tr rounds of argmax over the beams not yet chosen.
/// Ties go to the smaller (i, j).
inline RecommendationSet select_beams(const PowerTensor &t_hat, const PositionLabel &p, int n_tr)
{
    if (p.x < 1 || p.x > t_hat.l_x() || p.y < 1 || p.y > t_hat.l_y())
        throw std::invalid_argument("select_beams: position label outside the grid.");
    const int n_beams = t_hat.beams();
    if (n_tr < 1 || n_tr > n_beams)
        throw std::invalid_argument("select_beams: n_tr must lie in [1, |W|].");

    RecommendationSet out;
    out.position = p;
    out.source = RecommendationSource::tensor_completion;
    std::vector<bool> taken(static_cast<std::size_t>(n_beams), false);
    for (int n = 0; n < n_tr; ++n)
    {
        int best = -1;
        double best_value = -std::numeric_limits<double>::infinity();
        for (int b = 0; b < n_beams; ++b)
        {
            if (taken[static_cast<std::size_t>(b)])
                continue;
            const double v = t_hat.value(p.x - 1, p.y - 1, b / t_hat.c_phi(), b % t_hat.c_phi());
            if (best < 0 || v > best_value)
            {
                best = b;
                best_value = v;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        out.beams.push_back({best / t_hat.c_phi() + 1, best % t_hat.c_phi() + 1});
        out.scores.push_back(best_value);
    }
    return out;
}

inline RecommendationSet select_beams(const CompletedTensor &t_hat, const PositionLabel &p, int n_tr)
{
    return select_beams(t_hat.values, p, n_tr);
}

/// Nearest-observed-position baseline.
///
/// Observed positions are visited by increasing label-space distance to p (ties: smaller
/// p_x, then p_y); each contributes its not-yet-chosen beams by decreasing stored mean.
/// If the database runs out before n_tr, the remaining beams follow in (i, j) order with
/// score -inf.
inline RecommendationSet fingerprint_baseline(const MeasurementDatabase &db, const GridSpec &grid,
                                              const Codebook &codebook, const PositionLabel &p, int n_tr)
{
    if (db.empty())
        throw std::runtime_error("fingerprint_baseline: the measurement database is empty.");
    if (!grid.contains(p))
        throw std::invalid_argument("fingerprint_baseline: position label outside the grid.");
    n_tr = std::clamp(n_tr, 1, codebook.size());

    auto positions = std::vector<PositionLabel>();
    for (const auto &q : db.positions())
        positions.push_back(q);
    auto dist2 = [&](const PositionLabel &q) {
        const int dx = q.x - p.x;
        const int dy = q.y - p.y;
        return dx * dx + dy * dy;
    };
    std::stable_sort(positions.begin(), positions.end(),
                     [&](const PositionLabel &a, const PositionLabel &b) { return dist2(a) < dist2(b); });

    RecommendationSet out;
    out.position = p;
    out.source = RecommendationSource::fingerprint;
    std::set<BeamIndex> used;
    for (const auto &q : positions)
    {
        auto beams = db.at(q);
        std::stable_sort(beams.begin(), beams.end(),
                         [](const auto &a, const auto &b) { return a.second.mean_power > b.second.mean_power; });
        for (const auto &[beam, rec] : beams)
        {
            if (static_cast<int>(out.beams.size()) == n_tr)
                return out;
            if (used.insert(beam).second)
            {
                out.beams.push_back(beam);
                out.scores.push_back(to_db(rec.mean_power));
            }
        }
    }
    for (int b = 0; b < codebook.size() && static_cast<int>(out.beams.size()) < n_tr; ++b)
        if (used.insert(codebook.beam(b)).second)
        {
            out.beams.push_back(codebook.beam(b));
            out.scores.push_back(-std::numeric_limits<double>::infinity());
        }
    return out;
}

// Every codeword, in (i, j) order.
inline RecommendationSet exhaustive(const Codebook &codebook, const PositionLabel &p = {})
{
    RecommendationSet out;
    out.position = p;
    out.source = RecommendationSource::exhaustive;
    for (int b = 0; b < codebook.size(); ++b)
    {
        out.beams.push_back(codebook.beam(b));
        out.scores.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

// ---------------------------------------------------------------------------------------

inline void save_recommendations(const std::string &path, const std::vector<RecommendationSet> &sets)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_recommendations: cannot open " + path);
    os << "p_x,p_y,rank,i,j,predicted_dB,source\n";
    for (const auto &s : sets)
        for (std::size_t r = 0; r < s.beams.size(); ++r)
            os << s.position.x << ',' << s.position.y << ',' << r + 1 << ',' << s.beams[r].i << ',' << s.beams[r].j
               << ',' << detail::to_text(s.scores[r]) << ',' << to_string(s.source) << '\n';
    if (!os)
        throw std::runtime_error("save_recommendations: write failed for " + path);
}

inline std::vector<RecommendationSet> load_recommendations(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_recommendations: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "p_x,p_y,rank,i,j,predicted_dB,source")
        throw std::runtime_error("load_recommendations: unexpected header in " + path);
    std::vector<RecommendationSet> out;
    int line_no = 1;
    while (std::getline(is, line))
    {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto f = detail::split(line, ',');
        if (f.size() != 7)
            throw std::runtime_error("load_recommendations: " + where + ": expected 7 fields");
        const PositionLabel p{detail::parse_number<int>(f[0], where), detail::parse_number<int>(f[1], where)};
        const auto source = source_from_string(f[6]);
        const int rank = detail::parse_number<int>(f[2], where);
        if (out.empty() || out.back().position != p || out.back().source != source)
            out.push_back({p, {}, {}, source});
        if (rank != static_cast<int>(out.back().beams.size()) + 1)
            throw std::runtime_error("load_recommendations: " + where + ": ranks must be consecutive");
        out.back().beams.push_back({detail::parse_number<int>(f[3], where), detail::parse_number<int>(f[4], where)});
        out.back().scores.push_back(detail::parse_number<double>(f[5], where)); // accepts inf / nan
    }
    return out;
}

} // namespace beamrec

#endif
