#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::eval {

/// query_id -> keyframe_ids judged relevant (relevance 1).
struct Qrels {
    std::map<std::string, std::set<std::string>> relevant;
    std::size_t judgments = 0;
};

/// query_id -> keyframe_ids in rank order.
using Runs = std::map<std::string, std::vector<std::string>>;

/// `query_id<TAB>keyframe_id<TAB>relevance` with relevance 0 or 1. Blank
/// lines and `#` comments are skipped. Throws LineError(MalformedLine), and
/// Error(InvalidArgument) when the file holds no judgments.
Qrels parse_qrels(std::string_view text);

/// `query_id<TAB>keyframe_id<TAB>rank<TAB>score`, rank >= 1 and unique per
/// query. Entries are ordered by rank. Throws LineError(MalformedLine).
Runs parse_runs(std::string_view text);

struct Metric {
    enum class Kind { Recall, Mrr } kind = Kind::Mrr;
    std::size_t k = 0;
    std::string name;
};

/// "recall@10,mrr" -> metrics. Throws Error(InvalidArgument).
std::vector<Metric> parse_metrics(std::string_view spec);

struct MetricValue {
    std::string name;
    double value = 0.0;
};

/// Averages over queries with at least one relevant item; a query missing
/// from `runs` scores 0. recall@k is 1 when any relevant item is in the top
/// k; MRR uses the first relevant item's position. Throws
/// Error(InvalidArgument) when no query has a relevant item.
std::vector<MetricValue> evaluate(const Qrels& qrels, const Runs& runs, const std::vector<Metric>& metrics);

/// Fixed four decimals, e.g. "1.0000".
std::string format_metric(double value);

} // namespace fusionkit::eval
