#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mctsga/metrics.hpp"
#include "mctsga/rng.hpp"
#include "test_util.hpp"

using namespace mctsga;
using namespace mctsga::metrics;

TEST_CASE("confusion counts the four cells", "[metrics]") {
    SECTION("perfect pair") {
        const std::vector<double> s{0.9, 0.1};
        const std::vector<int> y{1, 0};
        const ConfusionMatrix cm = confusion(s, y, 0.5);
        REQUIRE(cm == ConfusionMatrix{1, 0, 0, 1});
    }
    SECTION("threshold is inclusive") {
        const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
        const std::vector<int> y{1, 1, 0, 0};
        const ConfusionMatrix cm = confusion(s, y, 0.5);
        REQUIRE(cm.tp == 2);  // ties predict positive
        REQUIRE(cm.fp == 2);
        REQUIRE(cm.fn == 0);
        REQUIRE(cm.tn == 0);
    }
    SECTION("random case matches a per-sample recount") {
        SplitMix64 rng(42);
        std::vector<double> s(20);
        std::vector<int> y(20);
        for (int i = 0; i < 20; ++i) {
            s[static_cast<std::size_t>(i)] = rng.uniform();
            y[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 0 : 1;
        }
        const ConfusionMatrix cm = confusion(s, y, 0.4);
        long tp = 0, fp = 0, fn = 0, tn = 0;
        for (int i = 0; i < 20; ++i) {
            const bool pred = s[static_cast<std::size_t>(i)] >= 0.4;
            const bool pos = y[static_cast<std::size_t>(i)] == 1;
            if (pred && pos) ++tp;
            if (pred && !pos) ++fp;
            if (!pred && pos) ++fn;
            if (!pred && !pos) ++tn;
        }
        REQUIRE(cm == ConfusionMatrix{tp, fp, fn, tn});
        REQUIRE(cm.total() == 20);
    }
    SECTION("length mismatch") {
        const std::vector<double> s{0.1};
        const std::vector<int> y{1, 0};
        REQUIRE_THROWS_AS(confusion(s, y, 0.5), InputError);
    }
}

TEST_CASE("accuracy and recall formulas", "[metrics]") {
    REQUIRE(recall(ConfusionMatrix{78, 5, 22, 9}) == 0.78);
    REQUIRE(accuracy(ConfusionMatrix{10, 0, 0, 10}) == 1.0);
    const ConfusionMatrix even{1, 1, 1, 1};
    REQUIRE(accuracy(even) == 0.5);
    REQUIRE(recall(even) == 0.5);
    REQUIRE_THROWS_AS(recall(ConfusionMatrix{0, 3, 0, 7}), InputError);
    REQUIRE_THROWS_AS(accuracy(ConfusionMatrix{}), InputError);
    for (double v : {accuracy(even), recall(even)}) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("roc_points sweep shape and endpoints", "[metrics]") {
    const std::vector<double> s{0.9, 0.8, 0.3, 0.1};
    const std::vector<int> y{1, 1, 0, 0};
    const auto pts = roc_points(s, y);
    REQUIRE(pts.front() == RocPoint{0.0, 0.0});
    REQUIRE(pts.back() == RocPoint{1.0, 1.0});
    for (std::size_t i = 1; i < pts.size(); ++i) {
        REQUIRE(pts[i].fpr >= pts[i - 1].fpr);
        REQUIRE(pts[i].tpr >= pts[i - 1].tpr);
    }
    REQUIRE(auc(pts) == 1.0);  // perfect ranking

    SECTION("inverted labels complement the area") {
        std::vector<int> inv{0, 0, 1, 1};
        REQUIRE(auc(roc_points(s, inv)) == Catch::Approx(0.0).margin(1e-15));
        SplitMix64 rng(7);
        std::vector<double> rs(30);
        std::vector<int> ry(30), riv(30);
        for (int i = 0; i < 30; ++i) {
            rs[static_cast<std::size_t>(i)] = rng.uniform();
            ry[static_cast<std::size_t>(i)] = i % 2;
            riv[static_cast<std::size_t>(i)] = 1 - i % 2;
        }
        REQUIRE(auc(roc_points(rs, ry)) ==
                Catch::Approx(1.0 - auc(roc_points(rs, riv))).epsilon(0).margin(1e-12));
    }

    SECTION("single-class labels are rejected") {
        const std::vector<int> ones{1, 1, 1, 1};
        REQUIRE_THROWS_AS(roc_points(s, ones), InputError);
    }
}

TEST_CASE("trapezoidal auc equals pairwise concordance", "[metrics][oracle]") {
    SplitMix64 rng(2023);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, 50));
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool has_both = false;
        while (!has_both) {
            long pos = 0;
            for (std::size_t i = 0; i < n; ++i) {
                // quantized scores force plenty of ties
                s[i] = std::round(rng.uniform() * 8.0) / 8.0;
                y[i] = rng.uniform() < 0.5 ? 0 : 1;
                pos += y[i];
            }
            has_both = pos > 0 && pos < static_cast<long>(n);
        }
        const double got = auc(roc_points(s, y));
        const double want = testutil::pairwise_auc(s, y);
        REQUIRE(got == Catch::Approx(want).epsilon(0).margin(1e-9));
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms", "[metrics]") {
    SplitMix64 rng(11);
    std::vector<double> s(40);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) {
        s[static_cast<std::size_t>(i)] = rng.uniform();
        y[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : 0;
    }
    const double base = auc(roc_points(s, y));
    auto transformed = [&](auto&& f) {
        std::vector<double> t(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) t[i] = f(s[i]);
        return auc(roc_points(t, y));
    };
    REQUIRE(transformed([](double x) { return 2.0 * x + 1.0; }) ==
            Catch::Approx(base).epsilon(0).margin(1e-12));
    REQUIRE(transformed([](double x) { return std::exp(x); }) ==
            Catch::Approx(base).epsilon(0).margin(1e-12));
    REQUIRE(transformed([](double x) { return x * x * x; }) ==
            Catch::Approx(base).epsilon(0).margin(1e-12));
}

TEST_CASE("evaluate_scores bundles the pieces consistently", "[metrics]") {
    const std::vector<double> s{0.9, 0.6, 0.4, 0.2};
    const std::vector<int> y{1, 0, 1, 0};
    const Evaluation ev = evaluate_scores(s, y);
    REQUIRE(ev.cm.total() == 4);
    REQUIRE(ev.accuracy == accuracy(ev.cm));
    REQUIRE(ev.recall == recall(ev.cm));
    REQUIRE(ev.auc == auc(ev.roc));
}
