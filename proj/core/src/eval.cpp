#include "fusionkit/eval.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/strings.hpp"

#include <algorithm>
#include <cstdio>

namespace fusionkit::eval {
namespace {

std::vector<std::string_view> fields(std::string_view line, std::size_t n, std::size_t lineno)
{
    auto f = strings::split(line, '\t');
    if (f.size() != n) {
        throw LineError(ErrorCode::MalformedLine, lineno,
                        "expected " + std::to_string(n) + " tab-separated fields, got " + std::to_string(f.size()));
    }
    for (const auto v : f) {
        if (v.empty()) {
            throw LineError(ErrorCode::MalformedLine, lineno, "empty field");
        }
    }
    return f;
}

bool skippable(std::string_view line)
{
    const auto t = strings::trim(line);
    return t.empty() || t.front() == '#';
}

} // namespace

Qrels parse_qrels(std::string_view text)
{
    Qrels q;
    const auto all = strings::lines(text);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (skippable(all[i])) {
            continue;
        }
        const auto f = fields(all[i], 3, i + 1);
        if (f[2] != "0" && f[2] != "1") {
            throw LineError(ErrorCode::MalformedLine, i + 1, "relevance must be 0 or 1");
        }
        ++q.judgments;
        auto& rel = q.relevant[std::string(f[0])];
        if (f[2] == "1") {
            rel.insert(std::string(f[1]));
        }
    }
    if (q.judgments == 0) {
        throw Error(ErrorCode::InvalidArgument, "qrels contain no judgments");
    }
    return q;
}

Runs parse_runs(std::string_view text)
{
    std::map<std::string, std::vector<std::pair<std::int64_t, std::string>>> ranked;
    const auto all = strings::lines(text);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (skippable(all[i])) {
            continue;
        }
        const auto f = fields(all[i], 4, i + 1);
        const auto rank = strings::parse_int(f[2]);
        if (!rank || *rank < 1) {
            throw LineError(ErrorCode::MalformedLine, i + 1, "rank must be an integer >= 1");
        }
        if (!strings::parse_double(f[3])) {
            throw LineError(ErrorCode::MalformedLine, i + 1, "score must be a finite number");
        }
        auto& list = ranked[std::string(f[0])];
        for (const auto& [r, id] : list) {
            if (r == *rank) {
                throw LineError(ErrorCode::MalformedLine, i + 1, "duplicate rank for query " + std::string(f[0]));
            }
        }
        list.emplace_back(*rank, std::string(f[1]));
    }
    Runs runs;
    for (auto& [query, list] : ranked) {
        std::sort(list.begin(), list.end());
        auto& out = runs[query];
        for (auto& [r, id] : list) {
            out.push_back(std::move(id));
        }
    }
    return runs;
}

std::vector<Metric> parse_metrics(std::string_view spec)
{
    std::vector<Metric> out;
    for (const auto part : strings::split(spec, ',')) {
        const auto name = strings::ascii_lower(strings::trim(part));
        Metric m;
        m.name = name;
        if (name == "mrr") {
            m.kind = Metric::Kind::Mrr;
        } else if (name.rfind("recall@", 0) == 0) {
            const auto k = strings::parse_canonical_uint(std::string_view(name).substr(7));
            if (!k || *k == 0) {
                throw Error(ErrorCode::InvalidArgument, "invalid cutoff in metric '" + name + "'");
            }
            m.kind = Metric::Kind::Recall;
            m.k = static_cast<std::size_t>(*k);
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown metric '" + name + "'");
        }
        out.push_back(std::move(m));
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no metrics requested");
    }
    return out;
}

std::vector<MetricValue> evaluate(const Qrels& qrels, const Runs& runs, const std::vector<Metric>& metrics)
{
    std::vector<double> sums(metrics.size(), 0.0);
    std::size_t queries = 0;
    for (const auto& [query, relevant] : qrels.relevant) {
        if (relevant.empty()) {
            continue;
        }
        ++queries;
        const auto it = runs.find(query);
        if (it == runs.end()) {
            continue;
        }
        // 1-based position of the first relevant item, 0 if none.
        std::size_t first = 0;
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            if (relevant.contains(it->second[i])) {
                first = i + 1;
                break;
            }
        }
        if (first == 0) {
            continue;
        }
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            if (metrics[m].kind == Metric::Kind::Mrr) {
                sums[m] += 1.0 / static_cast<double>(first);
            } else if (first <= metrics[m].k) {
                sums[m] += 1.0;
            }
        }
    }
    if (queries == 0) {
        throw Error(ErrorCode::InvalidArgument, "no query in qrels has a relevant item");
    }
    std::vector<MetricValue> out;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        out.push_back({metrics[m].name, sums[m] / static_cast<double>(queries)});
    }
    return out;
}

std::string format_metric(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

} // namespace fusionkit::eval
