#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hids/common.hpp"
#include "hids/metrics.hpp"

using namespace hids;

namespace {

ConfusionMatrix published_binary() {
    // The published split: 20,000 benign + 20,000 attack test records.
    ConfusionMatrix cm;
    cm.vocabulary = {"BENIGN", "Attack"};
    cm.counts = {19771, 229, 1105, 18895};
    return cm;
}

}  // namespace

TEST_CASE("confusion tallies predictions against truths") {
    std::vector<int32_t> truths{0, 0, 1, 1, 2, 2, 2};
    std::vector<int32_t> preds{0, 1, 1, 1, 2, 0, 2};
    ConfusionMatrix cm = confusion(preds, truths, {"BENIGN", "x", "y"});
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 2);
    CHECK(cm.at(2, 0) == 1);
    CHECK(cm.at(2, 2) == 2);
    CHECK(cm.total() == 7);
    CHECK(cm.trace() == 5);
    CHECK(cm.row_total(2) == 3);
    REQUIRE(cm.benign_index().has_value());
    CHECK(*cm.benign_index() == 0);
    CHECK_THROWS_AS(confusion(preds, std::vector<int32_t>{0}, {"a"}), InputError);
}

TEST_CASE("published-run rates reproduce") {
    ConfusionMatrix cm = published_binary();
    CHECK(format_percent(tnr(cm)) == "98.855");
    CHECK(format_percent(far(cm)) == "1.145");
    CHECK(format_percent(dr_overall(cm)) == "94.475");
    CHECK(format_percent(accuracy(cm)) == "96.665");
    CHECK(accuracy(cm) == doctest::Approx((19771.0 + 18895.0) / 40000.0).epsilon(1e-15));
}

TEST_CASE("per-class detection rate") {
    ConfusionMatrix cm;
    cm.vocabulary = {"BENIGN", "DDoS", "Bot"};
    cm.counts = {90, 5, 5,
                 4, 3296, 0,
                 0, 0, 0};
    auto ddos = dr_per_class(cm, 1);
    REQUIRE(ddos.has_value());
    CHECK(*ddos == doctest::Approx(3296.0 / 3300.0));
    CHECK(format_percent(*ddos) == "99.879");
    CHECK(!dr_per_class(cm, 2).has_value());
}

TEST_CASE("tnr needs benign rows") {
    ConfusionMatrix cm;
    cm.vocabulary = {"x", "y"};
    cm.counts = {1, 0, 0, 1};
    CHECK_THROWS_AS(tnr(cm), InputError);
    ConfusionMatrix empty_benign;
    empty_benign.vocabulary = {"BENIGN", "x"};
    empty_benign.counts = {0, 0, 0, 3};
    CHECK_THROWS_AS(tnr(empty_benign), InputError);
}

TEST_CASE("tnr plus far is exactly one") {
    SplitMix64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        ConfusionMatrix cm;
        cm.vocabulary = {"BENIGN", "a", "b"};
        cm.counts.assign(9, 0);
        for (size_t i = 0; i < 9; ++i) cm.counts[i] = rng.below(1000);
        cm.counts[0] += 1;  // keep the benign row populated
        CHECK(tnr(cm) + far(cm) == 1.0);
    }
}

TEST_CASE("random matrices agree with naive tallies") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        size_t k = 2 + rng.below(4);
        size_t n = 50 + rng.below(200);
        std::vector<std::string> vocab{"BENIGN"};
        for (size_t c = 1; c < k; ++c) vocab.push_back("atk" + std::to_string(c));
        std::vector<int32_t> truths(n), preds(n);
        for (size_t i = 0; i < n; ++i) {
            truths[i] = static_cast<int32_t>(rng.below(k));
            preds[i] = static_cast<int32_t>(rng.below(k));
        }
        ConfusionMatrix cm = confusion(preds, truths, vocab);

        std::vector<uint64_t> naive(k * k, 0);
        for (size_t i = 0; i < n; ++i)
            ++naive[static_cast<size_t>(truths[i]) * k + static_cast<size_t>(preds[i])];
        CHECK(cm.counts == naive);

        uint64_t diag = 0;
        for (size_t c = 0; c < k; ++c) diag += naive[c * k + c];
        CHECK(accuracy(cm) == static_cast<double>(diag) / static_cast<double>(n));
        CHECK(accuracy(cm) * static_cast<double>(cm.total()) ==
              doctest::Approx(static_cast<double>(cm.trace())).epsilon(1e-12));

        uint64_t benign_row = 0;
        for (size_t c = 0; c < k; ++c) benign_row += naive[c];
        if (benign_row > 0) {
            CHECK(dr_overall(cm) ==
                  doctest::Approx(static_cast<double>(diag - naive[0]) /
                                  static_cast<double>(n - benign_row)));
            double identity = (tnr(cm) * static_cast<double>(benign_row) +
                               dr_overall(cm) * static_cast<double>(n - benign_row)) /
                              static_cast<double>(n);
            CHECK(std::abs(accuracy(cm) - identity) <= 1e-12);
        }
    }
}

TEST_CASE("build_report assembles rates and per-attack rows") {
    ConfusionMatrix cm;
    cm.vocabulary = {"BENIGN", "DDoS", "Bot", "ghost"};
    cm.counts = {95, 3, 2, 0,
                 1, 99, 0, 0,
                 2, 0, 48, 0,
                 0, 0, 0, 0};
    MetricsReport report = build_report(cm);
    CHECK(report.vocabulary == cm.vocabulary);
    CHECK(report.counts == cm.counts);
    REQUIRE(report.tnr_value.has_value());
    CHECK(*report.tnr_value == doctest::Approx(0.95));
    REQUIRE(report.far_value.has_value());
    CHECK(*report.far_value == doctest::Approx(0.05));
    REQUIRE(report.dr_overall_value.has_value());
    CHECK(*report.dr_overall_value == doctest::Approx(147.0 / 150.0));
    CHECK(report.accuracy_value == doctest::Approx(242.0 / 250.0));
    REQUIRE(report.per_attack_dr.size() == 2);  // ghost has no actual rows
    CHECK(report.per_attack_dr[0].first == "DDoS");
    CHECK(report.per_attack_dr[0].second == doctest::Approx(0.99));
    CHECK(report.per_attack_dr[1].first == "Bot");
    CHECK(report.per_attack_dr[1].second == doctest::Approx(0.96));
    CHECK(!report.train_seconds.has_value());
    CHECK(!report.test_seconds.has_value());
}

TEST_CASE("reports without benign rows skip the benign rates") {
    ConfusionMatrix cm;
    cm.vocabulary = {"a", "b"};
    cm.counts = {5, 1, 2, 8};
    MetricsReport report = build_report(cm);
    CHECK(!report.tnr_value.has_value());
    CHECK(!report.far_value.has_value());
    // Without a benign class every record counts as an attack record.
    REQUIRE(report.dr_overall_value.has_value());
    CHECK(*report.dr_overall_value == doctest::Approx(13.0 / 16.0));
    CHECK(report.accuracy_value == doctest::Approx(13.0 / 16.0));
}

TEST_CASE("kv serialization round-trips exactly") {
    ConfusionMatrix cm = published_binary();
    MetricsReport report = build_report(cm);
    std::stringstream a;
    emit_kv(report, a);
    MetricsReport parsed = parse_kv(a);
    CHECK(parsed == report);

    report.train_seconds = 159.5;
    report.test_seconds = 2.27;
    std::stringstream b;
    emit_kv(report, b);
    MetricsReport timed = parse_kv(b);
    CHECK(timed == report);
    REQUIRE(timed.train_seconds.has_value());
    CHECK(*timed.train_seconds == 159.5);
}

TEST_CASE("kv layout carries class names with spaces") {
    ConfusionMatrix cm;
    cm.vocabulary = {"BENIGN", "Web Attack-Brute Force"};
    cm.counts = {10, 0, 1, 9};
    MetricsReport report = build_report(cm);
    std::stringstream buf;
    emit_kv(report, buf);
    MetricsReport parsed = parse_kv(buf);
    CHECK(parsed == report);
    REQUIRE(parsed.per_attack_dr.size() == 1);
    CHECK(parsed.per_attack_dr[0].first == "Web Attack-Brute Force");
}

TEST_CASE("the table renders the canonical row order") {
    ConfusionMatrix cm = published_binary();
    MetricsReport report = build_report(cm);
    std::ostringstream out;
    emit_table(report, out);
    std::string text = out.str();
    size_t tnr_pos = text.find("TNR (BENIGN)");
    size_t dr_pos = text.find("DR (Attack)");
    size_t far_pos = text.find("FAR");
    size_t overall_pos = text.find("DR (Overall)");
    size_t acc_pos = text.find("Accuracy");
    REQUIRE(tnr_pos != std::string::npos);
    REQUIRE(dr_pos != std::string::npos);
    REQUIRE(far_pos != std::string::npos);
    REQUIRE(overall_pos != std::string::npos);
    REQUIRE(acc_pos != std::string::npos);
    CHECK(tnr_pos < dr_pos);
    CHECK(dr_pos < far_pos);
    CHECK(far_pos < overall_pos);
    CHECK(overall_pos < acc_pos);
    CHECK(text.find("98.855%") != std::string::npos);
    CHECK(text.find("1.145%") != std::string::npos);
    CHECK(text.find("94.475%") != std::string::npos);
    CHECK(text.find("96.665%") != std::string::npos);
    CHECK(text.find("time") == std::string::npos);

    report.test_seconds = 2.27;
    std::ostringstream timed;
    emit_table(report, timed);
    CHECK(timed.str().find("Test time (s)") != std::string::npos);
}
