#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "timemark/attack.hpp"

using namespace timemark;

namespace {

AttackConfig quick_cfg() {
    AttackConfig cfg = AttackConfig::desk_scale();
    cfg.corpus_docs = 60;
    cfg.forgeries = 10;
    cfg.seed = 7;
    return cfg;
}

TimeKey target_key(const AttackConfig& cfg) {
    TimeKey key{tagged_seed_u64("TimeMark.attack.root", cfg.seed)};
    for (std::uint64_t t = 0; t < cfg.target_window; ++t) key = evolve(key);
    return key;
}

}  // namespace

TEST_CASE("window-derived payloads are fixed per window and distinct across windows") {
    const WatermarkConfig wm = AttackConfig::desk_scale().wm;
    CHECK(window_info_word(3, 10) == BitVec{0, 0, 0, 0, 0, 0, 0, 0, 1, 1});
    CHECK(assumed_payload(3, wm) == assumed_payload(3, wm));
    CHECK(assumed_payload(3, wm) != assumed_payload(4, wm));
    CHECK(assumed_payload(3, wm) == bch63_10().encode(window_info_word(3, 10)));
}

TEST_CASE("corpus shape and payload reuse semantics") {
    const AttackConfig cfg = quick_cfg();
    const TimeKey key = target_key(cfg);

    const AttackCorpus baseline = collect_corpus(WatermarkMode::FixedPayloadBaseline, 4, cfg, key);
    REQUIRE(baseline.entries.size() == 4);
    for (const CorpusEntry& e : baseline.entries) {
        CHECK(int(e.tokens.size()) == cfg.wm.min_length);
        CHECK(e.window == cfg.target_window);
        // fixed payload: every document in the window carries the same bits
        CHECK(e.generator_bits == baseline.entries[0].generator_bits);
    }

    const AttackCorpus timemark = collect_corpus(WatermarkMode::TimeMark, 4, cfg, key);
    int identical_pairs = 0;
    for (std::size_t a = 0; a < timemark.entries.size(); ++a) {
        CHECK(int(timemark.entries[a].tokens.size()) == cfg.wm.min_length);
        for (std::size_t b = a + 1; b < timemark.entries.size(); ++b) {
            if (timemark.entries[a].generator_bits == timemark.entries[b].generator_bits)
                ++identical_pairs;
        }
    }
    CHECK(identical_pairs == 0);  // fresh random payload per generation
}

TEST_CASE("triplet labels: ground truth for the baseline, coin flips for TimeMark") {
    const AttackConfig cfg = quick_cfg();
    const TimeKey key = target_key(cfg);

    const AttackCorpus baseline = collect_corpus(WatermarkMode::FixedPayloadBaseline, 3, cfg, key);
    const auto base_triplets = build_triplets(baseline, cfg);
    REQUIRE(base_triplets.size() == std::size_t(3 * cfg.wm.min_length));
    std::size_t idx = 0;
    for (const CorpusEntry& e : baseline.entries) {
        for (int i = 0; i < cfg.wm.min_length; ++i, ++idx) {
            CHECK(base_triplets[idx].label == e.generator_bits[i]);
            CHECK(base_triplets[idx].token == e.tokens[i]);
            CHECK(base_triplets[idx].context ==
                  (i == 0 ? cfg.wm.vocab_size : e.tokens[i - 1]));
        }
    }

    const AttackCorpus timemark = collect_corpus(WatermarkMode::TimeMark, 10, cfg, key);
    const auto tm_triplets = build_triplets(timemark, cfg);
    std::size_t agree = 0, total = 0;
    idx = 0;
    for (const CorpusEntry& e : timemark.entries) {
        for (int i = 0; i < cfg.wm.min_length; ++i, ++idx) {
            agree += tm_triplets[idx].label == e.generator_bits[i] ? 1 : 0;
            ++total;
        }
    }
    const double rate = double(agree) / double(total);
    CHECK(rate == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("surrogate training learns separable data and nothing from shuffled labels") {
    AttackConfig cfg = quick_cfg();
    cfg.buckets = 1u << 12;
    HashStream rng(tagged_seed_u64("attack-train-test", 1));

    SUBCASE("bucket-parity labels are learned almost perfectly") {
        std::vector<TrainingTriplet> triplets(20000);
        for (auto& t : triplets) {
            t.context = rng.uniform_below(64);
            t.token = rng.uniform_below(64);
            t.label = std::uint8_t(feature_bucket(t.context, t.token, cfg.buckets) & 1);
        }
        const auto clf = train_surrogate({triplets.data(), 16000}, cfg);
        int correct = 0;
        for (std::size_t i = 16000; i < triplets.size(); ++i) {
            const int pred = clf.score(triplets[i].context, triplets[i].token) > 0 ? 1 : 0;
            correct += pred == int(triplets[i].label) ? 1 : 0;
        }
        CHECK(double(correct) / 4000.0 > 0.95);
    }

    SUBCASE("independent random labels stay at chance") {
        std::vector<TrainingTriplet> triplets(20000);
        for (auto& t : triplets) {
            t.context = rng.uniform_below(64);
            t.token = rng.uniform_below(64);
            t.label = std::uint8_t(rng.next_bit());
        }
        const auto clf = train_surrogate({triplets.data(), 16000}, cfg);
        int correct = 0;
        for (std::size_t i = 16000; i < triplets.size(); ++i) {
            const int pred = clf.score(triplets[i].context, triplets[i].token) > 0 ? 1 : 0;
            correct += pred == int(triplets[i].label) ? 1 : 0;
        }
        const double acc = double(correct) / 4000.0;
        CHECK(std::abs(acc - 0.5) < 3.0 * 0.5 / std::sqrt(4000.0));
    }

    SUBCASE("empty training data is rejected") {
        CHECK_THROWS_AS(train_surrogate({}, cfg), std::invalid_argument);
    }
}

TEST_CASE("surrogate score is the log-odds of the classifier") {
    AttackConfig cfg = quick_cfg();
    SurrogateClassifier clf;
    clf.weights.assign(cfg.buckets, 0.0f);
    clf.bias = 0.0f;
    CHECK(surrogate_score(clf, 5, 9) == doctest::Approx(0.0));
    CHECK(clf.prob_one(5, 9) == doctest::Approx(0.5));

    const std::uint32_t b = feature_bucket(5, 9, cfg.buckets);
    clf.weights[b] = 1.0f;
    CHECK(surrogate_score(clf, 5, 9) == doctest::Approx(1.0));
    CHECK(clf.prob_one(5, 9) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));
    // log-odds identity
    const double h = clf.prob_one(5, 9);
    CHECK(std::log(h / (1 - h)) == doctest::Approx(surrogate_score(clf, 5, 9)).epsilon(1e-12));
    // the sign of the score is the argmax label
    CHECK((surrogate_score(clf, 5, 9) > 0) == (clf.prob_one(5, 9) > 0.5));
}

TEST_CASE("forging with a silent classifier reduces to plain model sampling") {
    const AttackConfig cfg = quick_cfg();
    SurrogateClassifier silent;
    silent.weights.assign(cfg.buckets, 0.0f);
    silent.bias = 0.0f;

    HashStream rng_a(tagged_seed_u64("forge-test", 1));
    const auto with_lambda = forge_document(silent, cfg.target_window, 4.0, cfg, rng_a);
    HashStream rng_b(tagged_seed_u64("forge-test", 1));
    const auto without = forge_document(silent, cfg.target_window, 0.0, cfg, rng_b);
    CHECK(with_lambda == without);  // zero scores make the reweighting vanish
    CHECK(int(without.size()) == cfg.wm.min_length);

    HashStream rng_c(tagged_seed_u64("forge-test", 1));
    CHECK(forge_document(silent, cfg.target_window, 0.0, cfg, rng_c) == without);
}

TEST_CASE("end-to-end: the baseline is forgeable, TimeMark is not") {
    AttackConfig cfg = AttackConfig::desk_scale();
    cfg.corpus_docs = 150;
    cfg.forgeries = 25;
    cfg.seed = 99;

    const ModeResult baseline = evaluate_mode(WatermarkMode::FixedPayloadBaseline, cfg);
    MESSAGE("baseline: balanced=", baseline.balanced_accuracy, " raw=", baseline.raw_accuracy,
            " passes=", baseline.forged_passes, "/", baseline.forgeries);
    CHECK(baseline.balanced_accuracy - 0.5 >= 3.0 * baseline.sigma_balanced);
    CHECK(baseline.balanced_accuracy > 0.8);  // the statistical pattern is wide open
    CHECK(baseline.forged_pass_rate > 0.5);   // far above the 1e-20-scale floor
    CHECK(baseline.false_acceptance_floor < 1e-10);

    const ModeResult timemark = evaluate_mode(WatermarkMode::TimeMark, cfg);
    MESSAGE("timemark: balanced=", timemark.balanced_accuracy, " raw=", timemark.raw_accuracy,
            " passes=", timemark.forged_passes, "/", timemark.forgeries);
    CHECK(timemark.ci_low <= 0.5);
    CHECK(timemark.ci_high >= 0.5);
    CHECK(timemark.forged_passes == 0);

    const AttackResult merged = evaluate_attack(cfg);
    const auto j = merged.to_json();
    CHECK(j.contains("baseline"));
    CHECK(j.contains("timemark"));
    CHECK_FALSE(merged.to_table().empty());
}

TEST_CASE("attack effectiveness grows with corpus size") {
    AttackConfig cfg = AttackConfig::desk_scale();
    cfg.seed = 17;
    const TimeKey key = target_key(cfg);

    // one large corpus, sliced into nested training sets of 100/1000/10000 triplets
    const AttackCorpus corpus = collect_corpus(WatermarkMode::FixedPayloadBaseline, 40, cfg, key);
    const auto all = build_triplets(corpus, cfg);
    REQUIRE(all.size() > 22000);
    const std::span<const TrainingTriplet> heldout(all.data() + 12000, 8000);

    double prev = 0.0;
    for (std::size_t train_size : {100u, 1000u, 10000u}) {
        const auto clf = train_surrogate({all.data(), train_size}, cfg);
        int correct = 0;
        for (const TrainingTriplet& t : heldout) {
            const int pred = clf.score(t.context, t.token) > 0 ? 1 : 0;
            correct += pred == int(t.label) ? 1 : 0;
        }
        const double acc = double(correct) / double(heldout.size());
        CAPTURE(train_size);
        MESSAGE("train=", train_size, " heldout accuracy=", acc);
        CHECK(acc > prev);
        prev = acc;
    }
    CHECK(prev > 0.75);  // the largest slice must already be strongly informative
}
