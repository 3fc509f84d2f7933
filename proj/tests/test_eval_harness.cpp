#include "handcontact/eval_harness.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/image.hpp"
#include "handcontact/util.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>
#include <set>

using namespace handcontact;

namespace {

ContactVector from_positives(int length, const std::set<int>& positives) {
    ContactVector c;
    c.values.assign(static_cast<std::size_t>(length), 0);
    for (int v : positives) c.values[static_cast<std::size_t>(v)] = 1;
    return c;
}

// independent confusion oracle built on set arithmetic
SampleMetrics brute_force_metrics(const ContactVector& pred, const ContactVector& gt) {
    std::set<int> p, g;
    for (int v = 0; v < static_cast<int>(pred.size()); ++v) {
        if (pred.values[static_cast<std::size_t>(v)]) p.insert(v);
        if (gt.values[static_cast<std::size_t>(v)]) g.insert(v);
    }
    SampleMetrics m;
    for (int v : p) m.fp += g.count(v) ? 0 : 1;
    for (int v : p) m.tp += g.count(v) ? 1 : 0;
    for (int v : g) m.fn += p.count(v) ? 0 : 1;
    m.tn = static_cast<long>(pred.size()) - m.tp - m.fp - m.fn;
    m.precision = p.empty() ? (g.empty() ? 1.0 : 0.0) : static_cast<double>(m.tp) / p.size();
    m.recall = g.empty() ? (p.empty() ? 1.0 : 0.0) : static_cast<double>(m.tp) / g.size();
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

} // namespace

TEST_SUITE("eval_harness") {

TEST_CASE("identical non-trivial prediction scores ones") {
    ContactVector gt = from_positives(778, {1, 5, 100, 388});
    SampleMetrics m = sample_metrics(gt, gt);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.tp == 4);
    CHECK(m.tn == 774);
}

TEST_CASE("hand-computed confusion case") {
    ContactVector gt = from_positives(778, {1, 2, 3, 4});
    ContactVector pred = from_positives(778, {3, 4, 5, 6});
    SampleMetrics m = sample_metrics(pred, gt);
    CHECK(m.tp == 2);
    CHECK(m.fp == 2);
    CHECK(m.fn == 2);
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(0.5));
    CHECK(m.f1 == doctest::Approx(0.5));
}

TEST_CASE("both-empty convention scores ones, half-empty scores zero") {
    ContactVector zero = from_positives(778, {});
    SampleMetrics both = sample_metrics(zero, zero);
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);
    CHECK(both.f1 == 1.0);

    SampleMetrics miss = sample_metrics(zero, from_positives(778, {3}));
    CHECK(miss.precision == 0.0);
    CHECK(miss.recall == 0.0);
    CHECK(miss.f1 == 0.0);

    SampleMetrics ghost = sample_metrics(from_positives(778, {3}), zero);
    CHECK(ghost.precision == 0.0);
    CHECK(ghost.recall == 0.0);
    CHECK(ghost.f1 == 0.0);
}

TEST_CASE("length mismatch is rejected") {
    CHECK_THROWS_AS(sample_metrics(from_positives(777, {}), from_positives(778, {})),
                    LengthMismatchError);
}

TEST_CASE("matches the brute-force oracle on random pairs") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 1000; ++trial) {
        ContactVector pred = testsupport::random_contact(rng, 778, 0.3);
        ContactVector gt = testsupport::random_contact(rng, 778, 0.2);
        SampleMetrics a = sample_metrics(pred, gt);
        SampleMetrics b = brute_force_metrics(pred, gt);
        REQUIRE(a.tp == b.tp);
        REQUIRE(a.fp == b.fp);
        REQUIRE(a.fn == b.fn);
        REQUIRE(a.tn == b.tn);
        REQUIRE(a.precision == b.precision);
        REQUIRE(a.recall == b.recall);
        REQUIRE(a.f1 == b.f1);
    }
}

TEST_CASE("aggregation: macro means and micro pooling") {
    SampleMetrics a;
    a.f1 = 0.4;
    a.precision = 0.4;
    a.recall = 0.4;
    a.tp = 4;
    a.fp = 6;
    a.fn = 6;
    a.tn = 762;
    SampleMetrics b;
    b.f1 = 0.6;
    b.precision = 0.6;
    b.recall = 0.6;
    b.tp = 6;
    b.fp = 4;
    b.fn = 4;
    b.tn = 764;
    MetricsAggregate agg = aggregate_metrics({a, b});
    CHECK(agg.macro_f1 == doctest::Approx(0.5));
    CHECK(agg.tp == 10);

    MetricsAggregate one = aggregate_metrics({a});
    CHECK(one.macro_f1 == doctest::Approx(0.4));
    CHECK(one.micro_precision == doctest::Approx(0.4));

    CHECK_THROWS_AS(aggregate_metrics({}), EmptyDatasetError);
}

TEST_CASE("mean-of-F1 differs from F1-of-means on a constructed pair") {
    // sample A: balanced and strong; sample B: precise but low recall
    ContactVector gt_a = from_positives(778, {1, 2, 3, 4});
    ContactVector pr_a = from_positives(778, {1, 2, 3, 4});
    std::set<int> gt_b_set;
    for (int v = 10; v < 30; ++v) gt_b_set.insert(v);
    ContactVector gt_b = from_positives(778, gt_b_set);
    ContactVector pr_b = from_positives(778, {10});

    auto m_a = sample_metrics(pr_a, gt_a);
    auto m_b = sample_metrics(pr_b, gt_b);
    MetricsAggregate agg = aggregate_metrics({m_a, m_b});
    const double f1_of_means = 2.0 * agg.macro_precision * agg.macro_recall /
                               (agg.macro_precision + agg.macro_recall);
    CHECK(agg.macro_f1 != doctest::Approx(f1_of_means).epsilon(1e-6));
}

TEST_CASE("usage report prices per-sample token totals") {
    PricingTable pricing;
    pricing.models["gpt-5.5"] = ModelPricing{30.0, {}};

    StageTranscript t;
    t.sample_id = "s000";
    AttemptRecord a;
    a.attempt = 1;
    a.output_tokens = 3588;
    t.stage0.attempts.push_back(a);
    t.stage2.skipped = true;

    StageTranscript t2;
    t2.sample_id = "s001";
    AttemptRecord b1;
    b1.attempt = 1;
    b1.output_tokens = 1000;
    AttemptRecord b2;
    b2.attempt = 2;
    b2.output_tokens = 1000;
    t2.stage1.attempts = {b1, b2};

    UsageLedger ledger = usage_report({t, t2}, "gpt-5.5", pricing);
    REQUIRE(ledger.rows.size() == 2);
    CHECK(ledger.rows[0].total_tokens == 3588);
    CHECK(util::format_usd(ledger.rows[0].cost_usd) == "$0.108");
    CHECK(ledger.rows[0].stage_tokens[2] == 0); // skipped dense stage
    CHECK(ledger.rows[1].total_tokens == 2000); // summed over attempts
    CHECK(ledger.total_tokens == 5588);
    CHECK(ledger.mean_tokens_per_sample == doctest::Approx(2794.0));
    CHECK(ledger.total_cost_usd ==
          doctest::Approx(ledger.rows[0].cost_usd + ledger.rows[1].cost_usd));

    CHECK_THROWS_AS(usage_report({t}, "gpt-9000", pricing), UnknownModelError);
}

TEST_CASE("bundled synthetic dataset loads with all invariants") {
    DatasetManifest dataset =
        load_dataset(testsupport::assets_dir() / "dataset" / "manifest.jsonl");
    CHECK(dataset.samples.size() == 20);
    std::set<std::string> ids;
    bool has_empty_gt = false;
    for (const auto& s : dataset.samples) {
        CHECK(ids.insert(s.id).second);
        REQUIRE(s.gt_contact.has_value());
        CHECK(s.gt_contact->size() == 778);
        CHECK(std::filesystem::exists(s.image_path));
        long positives = 0;
        for (auto v : s.gt_contact->values) positives += v;
        if (positives == 0) has_empty_gt = true;
    }
    CHECK(has_empty_gt); // the no-contact sample is part of the fixture
}

TEST_CASE("dataset loader rejects malformed manifests") {
    testsupport::TempDir tmp("dataset");
    save_jpeg(make_image(4, 4, Color{1, 2, 3}), tmp.path() / "img.jpg", 90);

    auto gt_of = [](int length, int ones) {
        std::string list;
        for (int i = 0; i < length; ++i) list += (i ? "," : "") + std::string(i < ones ? "1" : "0");
        return list;
    };

    SUBCASE("wrong gt length names the sample") {
        util::write_text_file(tmp.path() / "m.jsonl",
                              R"({"id":"bad","image_path":"img.jpg","gt_contact":[)" +
                                  gt_of(777, 3) + R"(],"hand":"right"})" + "\n");
        try {
            load_dataset(tmp.path() / "m.jsonl");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("bad") != std::string::npos);
        }
    }

    SUBCASE("duplicate ids are rejected") {
        const std::string row = R"({"id":"dup","image_path":"img.jpg","gt_contact":[)" +
                                gt_of(778, 1) + R"(],"hand":"right"})";
        util::write_text_file(tmp.path() / "m.jsonl", row + "\n" + row + "\n");
        CHECK_THROWS_AS(load_dataset(tmp.path() / "m.jsonl"), ParseError);
    }

    SUBCASE("missing image files are reported with ids") {
        util::write_text_file(tmp.path() / "m.jsonl",
                              R"({"id":"ghost","image_path":"nope.jpg","gt_contact":[)" +
                                  gt_of(778, 1) + R"(],"hand":"right"})" + "\n");
        try {
            load_dataset(tmp.path() / "m.jsonl");
            FAIL("expected MissingImageError");
        } catch (const MissingImageError& e) {
            CHECK(std::string(e.what()).find("ghost") != std::string::npos);
        }
    }

    SUBCASE("soft labels binarize at 0.5") {
        std::string list;
        for (int i = 0; i < 778; ++i)
            list += (i ? "," : "") + std::string(i == 0 ? "0.9" : (i == 1 ? "0.4" : "0"));
        util::write_text_file(tmp.path() / "m.jsonl",
                              R"({"id":"soft","image_path":"img.jpg","gt_contact":[)" + list +
                                  R"(],"hand":"right"})" + "\n");
        DatasetManifest dataset = load_dataset(tmp.path() / "m.jsonl");
        CHECK(dataset.samples[0].gt_contact->values[0] == 1);
        CHECK(dataset.samples[0].gt_contact->values[1] == 0);
    }
}

} // TEST_SUITE
