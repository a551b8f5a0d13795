#include <catch_amalgamated.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/eval.hpp"

#include <functional>

using namespace fusionkit;
using namespace fusionkit::eval;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

double value_of(const std::vector<MetricValue>& values, const std::string& name)
{
    for (const auto& v : values) {
        if (v.name == name) {
            return v.value;
        }
    }
    FAIL("metric missing: " << name);
    return -1.0;
}

} // namespace

TEST_CASE("qrels parsing", "[eval]")
{
    const auto q = parse_qrels("# q\tkf\trel\nq1\tkfA\t1\nq1\tkfB\t0\n\nq2\tkfC\t1\n");
    CHECK(q.judgments == 3);
    CHECK(q.relevant.at("q1") == std::set<std::string>{"kfA"});
    CHECK(q.relevant.at("q2") == std::set<std::string>{"kfC"});
    CHECK(code_of([] { parse_qrels(""); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_qrels("# only a comment\n"); }) == ErrorCode::InvalidArgument);
    try {
        parse_qrels("q1\tkfA\t1\nq1\tkfB\t2\n");
        FAIL("accepted relevance 2");
    } catch (const LineError& e) {
        CHECK(e.code() == ErrorCode::MalformedLine);
        CHECK(e.line() == 2);
    }
    CHECK(code_of([] { parse_qrels("q1\tkfA\n"); }) == ErrorCode::MalformedLine);
}

TEST_CASE("run parsing orders by rank", "[eval]")
{
    const auto r = parse_runs("q1\tkfB\t2\t0.5\nq1\tkfA\t1\t0.9\nq2\tkfC\t1\t0.1\n");
    CHECK(r.at("q1") == std::vector<std::string>{"kfA", "kfB"});
    CHECK(r.at("q2") == std::vector<std::string>{"kfC"});
    CHECK(code_of([] { parse_runs("q1\tkfA\t0\t0.5\n"); }) == ErrorCode::MalformedLine);
    CHECK(code_of([] { parse_runs("q1\tkfA\t1\t0.5\nq1\tkfB\t1\t0.4\n"); }) == ErrorCode::MalformedLine);
    CHECK(code_of([] { parse_runs("q1\tkfA\t1\tx\n"); }) == ErrorCode::MalformedLine);
    CHECK(code_of([] { parse_runs("q1\tkfA\t1\n"); }) == ErrorCode::MalformedLine);
}

TEST_CASE("metric list parsing", "[eval]")
{
    const auto m = parse_metrics("recall@10,mrr,recall@1");
    REQUIRE(m.size() == 3);
    CHECK(m[0].kind == Metric::Kind::Recall);
    CHECK(m[0].k == 10);
    CHECK(m[0].name == "recall@10");
    CHECK(m[1].kind == Metric::Kind::Mrr);
    CHECK(m[1].name == "mrr");
    CHECK(code_of([] { parse_metrics("recall@0"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_metrics("precision@5"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_metrics(""); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("perfect and second-rank runs", "[eval]")
{
    const auto qrels = parse_qrels("q1\tkfA\t1\n");
    const auto metrics = parse_metrics("recall@10,mrr");
    const auto perfect = evaluate(qrels, parse_runs("q1\tkfA\t1\t0.9\nq1\tkfB\t2\t0.5\n"), metrics);
    CHECK(format_metric(value_of(perfect, "recall@10")) == "1.0000");
    CHECK(format_metric(value_of(perfect, "mrr")) == "1.0000");

    const auto second = evaluate(qrels, parse_runs("q1\tkfB\t1\t0.9\nq1\tkfA\t2\t0.5\n"), metrics);
    CHECK(format_metric(value_of(second, "recall@10")) == "1.0000");
    CHECK(format_metric(value_of(second, "mrr")) == "0.5000");
}

TEST_CASE("averaging over judged queries", "[eval]")
{
    const auto qrels = parse_qrels("q1\tkfA\t1\nq2\tkfX\t1\nq3\tkfZ\t0\n");
    const auto runs = parse_runs("q1\tkfB\t1\t1\nq1\tkfC\t2\t1\nq1\tkfA\t3\t1\nq3\tkfZ\t1\t1\n");
    const auto v = evaluate(qrels, runs, parse_metrics("recall@1,recall@3,mrr"));
    CHECK_THAT(value_of(v, "recall@1"), WithinAbs(0.0, 1e-12));
    CHECK_THAT(value_of(v, "recall@3"), WithinAbs(0.5, 1e-12));
    CHECK_THAT(value_of(v, "mrr"), WithinAbs(1.0 / 6.0, 1e-12));
    CHECK(format_metric(1.0 / 6.0) == "0.1667");
    CHECK(code_of([&] { evaluate(parse_qrels("q1\tkfA\t0\n"), runs, parse_metrics("mrr")); }) ==
          ErrorCode::InvalidArgument);
}
