#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "mctsga/network.hpp"
#include "test_util.hpp"

using namespace mctsga;

namespace {
MlpModel zero_model(const MlpSpec& spec) {
    MlpModel m = init_model(spec, 0);
    for (auto& w : m.weights)
        for (double& v : w.data()) v = 0.0;
    return m;
}
}  // namespace

TEST_CASE("parameter counts follow the layer arithmetic", "[network]") {
    REQUIRE(MlpSpec{{8, 16, 8, 4, 1}}.param_count() == 321);  // 144+136+36+5
    REQUIRE(MlpSpec{{2, 1}}.param_count() == 3);              // 2 weights + 1 bias
    REQUIRE(MlpSpec{{3, 4, 1}}.param_count() == 3 * 4 + 4 + 4 + 1);
}

TEST_CASE("init_model is seeded, Glorot-bounded, zero-biased", "[network]") {
    const MlpSpec spec{{8, 16, 8, 4, 1}};
    const MlpModel a = init_model(spec, 42);
    const MlpModel b = init_model(spec, 42);
    REQUIRE(a == b);
    REQUIRE(init_model(spec, 43).weights[0].data() != a.weights[0].data());

    for (int l = 0; l < spec.layer_count(); ++l) {
        const double fan_in = spec.layer_sizes[static_cast<std::size_t>(l)];
        const double fan_out = spec.layer_sizes[static_cast<std::size_t>(l) + 1];
        const double r = std::sqrt(6.0 / (fan_in + fan_out));
        for (const double v : a.weights[static_cast<std::size_t>(l)].data()) {
            REQUIRE(v >= -r);
            REQUIRE(v <= r);
        }
        for (const double v : a.biases[static_cast<std::size_t>(l)]) REQUIRE(v == 0.0);
    }
}

TEST_CASE("forward matches hand-computed values", "[network]") {
    SECTION("all-zero parameters give 0.5 for any input") {
        const MlpModel m = zero_model(MlpSpec{{8, 16, 8, 4, 1}});
        const std::vector<double> x{0.1, 0.9, 0.3, 0.5, 0.0, 1.0, 0.7, 0.2};
        REQUIRE(forward(m, x) == 0.5);
    }
    SECTION("large positive bias saturates") {
        MlpModel m = zero_model(MlpSpec{{1, 1}});
        m.biases[0][0] = 100.0;
        REQUIRE(forward(m, std::vector<double>{0.3}) > 0.999);
    }
    SECTION("sigmoid(1) for the hand-built [2,1] model") {
        MlpModel m = zero_model(MlpSpec{{2, 1}});
        m.weights[0].at(0, 0) = 1.0;
        m.weights[0].at(0, 1) = 1.0;
        // z = 0.5 + 0.5 = 1; 1/(1+e^-1) computed by hand
        REQUIRE(forward(m, std::vector<double>{0.5, 0.5}) ==
                Catch::Approx(0.7310585786300049).epsilon(0).margin(1e-12));
    }
    SECTION("dimension mismatch is an input error") {
        const MlpModel m = zero_model(MlpSpec{{2, 1}});
        REQUIRE_THROWS_AS(forward(m, std::vector<double>{0.5}), InputError);
    }
}

TEST_CASE("forward output stays strictly inside (0,1)", "[network]") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const MlpSpec spec = testutil::random_spec(rng);
        const MlpModel m = init_model(spec, rng.next());
        std::vector<double> x(static_cast<std::size_t>(spec.input_size()));
        for (double& v : x) v = rng.uniform();
        const double p = forward(m, x);
        REQUIRE(p > 0.0);
        REQUIRE(p < 1.0);
    }
    // even a hugely saturated model stays clamped off the endpoints
    MlpModel m = zero_model(MlpSpec{{1, 1}});
    m.biases[0][0] = 1e6;
    REQUIRE(forward(m, std::vector<double>{1.0}) < 1.0);
    m.biases[0][0] = -1e6;
    REQUIRE(forward(m, std::vector<double>{1.0}) > 0.0);
}

TEST_CASE("bce_loss matches analytic values", "[network]") {
    REQUIRE(bce_loss(0.5, 1) == Catch::Approx(0.6931471805599453).epsilon(0).margin(1e-12));
    REQUIRE(bce_loss(1.0 - 1e-9, 1) < 1e-6);
    REQUIRE(bce_loss(0.9, 0) == Catch::Approx(2.302585092994046).epsilon(0).margin(1e-12));
    REQUIRE(bce_loss(0.0, 1) > 0.0);  // clamp keeps log finite
    REQUIRE(std::isfinite(bce_loss(1.0, 0)));
}

TEST_CASE("backprop gradients match central finite differences", "[network][oracle]") {
    SplitMix64 rng(555);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const MlpSpec spec{{3, 4, 1}};
        const MlpModel m = init_model(spec, rng.next());
        const auto data = testutil::random_dataset(5, 3, rng.next());
        std::vector<std::size_t> rows(5);
        std::iota(rows.begin(), rows.end(), std::size_t{0});

        const Gradients got = gradients(m, data.features, data.labels, rows);
        const Gradients want = testutil::fd_gradients(m, data.features, data.labels, rows);

        const auto rel = [](double a, double b) {
            const double denom = std::max(1e-8, std::abs(a) + std::abs(b));
            return std::abs(a - b) / denom;
        };
        for (std::size_t l = 0; l < got.weights.size(); ++l) {
            for (std::size_t i = 0; i < got.weights[l].data().size(); ++i)
                worst = std::max(worst, rel(got.weights[l].data()[i], want.weights[l].data()[i]));
            for (std::size_t i = 0; i < got.biases[l].size(); ++i)
                worst = std::max(worst, rel(got.biases[l][i], want.biases[l][i]));
        }
    }
    REQUIRE(worst < 1e-4);
}

TEST_CASE("gradients are invariant under batch duplication", "[network]") {
    SplitMix64 rng(31);
    const MlpSpec spec{{3, 4, 1}};
    const MlpModel m = init_model(spec, 8);
    const auto data = testutil::random_dataset(4, 3, 9);

    const std::vector<std::size_t> single{2};
    const std::vector<std::size_t> doubled{2, 2};
    const Gradients a = gradients(m, data.features, data.labels, single);
    const Gradients b = gradients(m, data.features, data.labels, doubled);
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        REQUIRE(a.weights[l].data() == b.weights[l].data());
        REQUIRE(a.biases[l] == b.biases[l]);
    }
}

TEST_CASE("zero model with symmetric labels has zero output-bias gradient", "[network]") {
    const MlpSpec spec{{2, 1}};
    const MlpModel m = zero_model(spec);
    const auto data = testutil::make_dataset({{0.2, 0.4}, {0.2, 0.4}}, {0, 1});
    const std::vector<std::size_t> rows{0, 1};
    const Gradients g = gradients(m, data.features, data.labels, rows);
    REQUIRE(g.biases[0][0] == 0.0);
}

TEST_CASE("train with zero learning rate is a no-op", "[network]") {
    const auto data = testutil::random_dataset(12, 3, 77);
    const MlpSpec spec{{3, 4, 1}};
    const MlpModel m = init_model(spec, 5);

    for (const auto opt : {TrainConfig::Optimizer::sgd, TrainConfig::Optimizer::adam}) {
        TrainConfig cfg;
        cfg.optimizer = opt;
        cfg.learning_rate = 0.0;
        cfg.epochs = 3;
        cfg.batch_size = 4;
        cfg.seed = 1;
        const TrainResult r = train(m, data, cfg);
        REQUIRE(r.model == m);
        REQUIRE(r.loss_history.size() == 3);
    }
}

TEST_CASE("training history is bit-identical across reruns", "[network]") {
    const auto data = testutil::random_dataset(30, 3, 123);
    const MlpModel m = init_model(MlpSpec{{3, 4, 1}}, 11);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 5;
    cfg.seed = 99;
    const TrainResult a = train(m, data, cfg);
    const TrainResult b = train(m, data, cfg);
    REQUIRE(a.loss_history == b.loss_history);
    REQUIRE(a.model == b.model);
}

TEST_CASE("adam drives a separable toy set below 0.1 BCE in 200 epochs", "[network]") {
    // single threshold feature with a margin around 0.5, second feature noise
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    SplitMix64 rng(4);
    for (int i = 0; i < 40; ++i) {
        const double x = i < 20 ? 0.02 * i : 0.62 + 0.02 * (i - 20);
        rows.push_back({x, rng.uniform()});
        labels.push_back(x >= 0.5 ? 1 : 0);
    }
    const auto data = testutil::make_dataset(rows, labels);

    TrainConfig cfg;
    cfg.optimizer = TrainConfig::Optimizer::adam;
    cfg.learning_rate = 0.01;
    cfg.epochs = 200;
    cfg.batch_size = 10;
    cfg.seed = 7;
    const TrainResult r = train(init_model(MlpSpec{{2, 4, 1}}, 13), data, cfg);
    REQUIRE(r.loss_history.size() == 200);
    REQUIRE(r.loss_history.back() < 0.1);
}

TEST_CASE("train reports the epoch of a non-finite loss", "[network]") {
    const auto data = testutil::random_dataset(8, 2, 3);
    MlpModel m = init_model(MlpSpec{{2, 1}}, 2);
    m.weights[0].at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    REQUIRE_THROWS_WITH(train(m, data, cfg), Catch::Matchers::ContainsSubstring("epoch 0"));
}

TEST_CASE("train validates its config", "[network]") {
    const auto data = testutil::random_dataset(8, 2, 3);
    const MlpModel m = init_model(MlpSpec{{2, 1}}, 2);
    TrainConfig cfg;
    cfg.batch_size = 9;  // > n
    REQUIRE_THROWS_AS(train(m, data, cfg), InputError);
    cfg.batch_size = 0;
    REQUIRE_THROWS_AS(train(m, data, cfg), InputError);
    cfg.batch_size = 4;
    cfg.epochs = 0;
    REQUIRE_THROWS_AS(train(m, data, cfg), InputError);
}

TEST_CASE("model save/load round trips exactly", "[network]") {
    const MlpModel m = init_model(MlpSpec{{8, 16, 8, 4, 1}}, 2024);
    const auto path = testutil::temp_file("model_roundtrip.txt");
    save_model(m, path);
    const MlpModel back = load_model(path);
    REQUIRE(back == m);

    SECTION("rejects junk") {
        const auto bad = testutil::write_temp("bad_model.txt", "not-a-model 1\n");
        REQUIRE_THROWS_AS(load_model(bad), InputError);
        const auto truncated = testutil::write_temp("trunc_model.txt",
                                                    "mctsga-model 1\nlayers 2 1\nlayer 0 3\n0.5 0.5\n");
        REQUIRE_THROWS_AS(load_model(truncated), InputError);
    }
}
