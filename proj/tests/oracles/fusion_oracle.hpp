#pragma once

// Exhaustive late-fusion reference: scores every item in both spaces with a
// plain sequential dot product and sorts the whole list. Shares no code with
// the engine's scan, pooling or heap.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace fkoracle {

struct FusedRow {
    std::string id;
    double score_a;
    double score_b;
    double fused;
};

inline double plain_dot(const std::vector<float>& x, const std::vector<float>& y)
{
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += static_cast<long double>(x[i]) * static_cast<long double>(y[i]);
    }
    return static_cast<double>(s);
}

inline bool before(const FusedRow& x, const FusedRow& y, double FusedRow::*key)
{
    if (x.*key != y.*key) {
        return x.*key > y.*key;
    }
    return x.id < y.id;
}

/// All items sorted by (fused desc, id asc), truncated to k.
inline std::vector<FusedRow> exhaustive_fusion(const std::vector<std::string>& ids,
                                               const std::vector<std::vector<float>>& a,
                                               const std::vector<std::vector<float>>& b, const std::vector<float>& qa,
                                               const std::vector<float>& qb, double alpha, std::size_t k)
{
    std::vector<FusedRow> rows;
    rows.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double sa = plain_dot(a[i], qa);
        const double sb = plain_dot(b[i], qb);
        rows.push_back({ids[i], sa, sb, alpha * sa + (1.0 - alpha) * sb});
    }
    std::sort(rows.begin(), rows.end(), [](const FusedRow& x, const FusedRow& y) { return before(x, y, &FusedRow::fused); });
    rows.resize(std::min(k, rows.size()));
    return rows;
}

/// Single-space ranking by (score desc, id asc).
inline std::vector<std::string> single_space_ranking(const std::vector<std::string>& ids,
                                                     const std::vector<std::vector<float>>& rows,
                                                     const std::vector<float>& q, std::size_t k)
{
    std::vector<FusedRow> scored;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double s = plain_dot(rows[i], q);
        scored.push_back({ids[i], s, 0.0, s});
    }
    std::sort(scored.begin(), scored.end(),
              [](const FusedRow& x, const FusedRow& y) { return before(x, y, &FusedRow::score_a); });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) {
        out.push_back(scored[i].id);
    }
    return out;
}

} // namespace fkoracle
