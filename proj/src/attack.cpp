#include "timemark/attack.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "timemark/analysis.hpp"
#include "timemark/decoder.hpp"

namespace timemark {

namespace {

constexpr double kScoreClamp = 30.0;  // keeps exp(lambda * s) finite

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Digest32 derived_seed(const AttackConfig& cfg, std::string_view what, std::uint64_t index) {
    Sha256 h;
    h.update(what.data(), what.size());
    std::uint8_t be[16];
    for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(cfg.seed >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) be[8 + i] = std::uint8_t(index >> (56 - 8 * i));
    h.update(be, 16);
    return h.finalize();
}

// Context digest of the weakened baseline: the previous token only.
PrefixDigest context_digest(std::span<const std::uint32_t> tokens, int position) {
    if (position <= 1) return prefix_hash({});
    return prefix_hash(tokens.subspan(position - 2, 1));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

const char* to_string(WatermarkMode mode) {
    return mode == WatermarkMode::FixedPayloadBaseline ? "FixedPayloadBaseline" : "TimeMark";
}

AttackConfig AttackConfig::desk_scale() {
    AttackConfig cfg;
    cfg.wm.vocab_size = 64;
    cfg.model = SyntheticModel{424242, cfg.wm.vocab_size, 0.0};
    return cfg;
}

double SurrogateClassifier::score(std::uint32_t context, std::uint32_t token) const {
    return double(weights[feature_bucket(context, token, std::uint32_t(weights.size()))]) + bias;
}

double SurrogateClassifier::prob_one(std::uint32_t context, std::uint32_t token) const {
    return sigmoid(score(context, token));
}

std::uint32_t feature_bucket(std::uint32_t context, std::uint32_t token, std::uint32_t buckets) {
    return std::uint32_t(splitmix64((std::uint64_t(context) << 32) | token) & (buckets - 1));
}

BitVec window_info_word(std::uint64_t window, int info_bits) {
    BitVec bits(info_bits);
    for (int j = 0; j < info_bits; ++j) bits[j] = (window >> (info_bits - 1 - j)) & 1;
    return bits;
}

BitVec assumed_payload(std::uint64_t window, const WatermarkConfig& cfg) {
    return bch63_10().encode(window_info_word(window, cfg.info_bits));
}

int baseline_allocate(int position, const WatermarkConfig& cfg) {
    if (position < 1 || position > cfg.min_length)
        throw std::invalid_argument("baseline_allocate: position out of range");
    return (position - 1) % cfg.payload_bits + 1;
}

std::vector<std::uint32_t> baseline_encode(const TimeKey& key, std::uint64_t window,
                                           const AttackConfig& cfg, HashStream& rng) {
    cfg.wm.validate();
    const BitVec payload = assumed_payload(window, cfg.wm);
    std::vector<std::uint32_t> tokens;
    tokens.reserve(cfg.wm.min_length);
    PrefixHasher full_prefix;
    for (int i = 1; i <= cfg.wm.min_length; ++i) {
        const Seed seed = derive_seed(key, nullptr, context_digest(tokens, i));
        const GreenMask mask = greenlist(seed, cfg.wm.vocab_size);
        const int bit = payload[baseline_allocate(i, cfg.wm) - 1];
        const TokenDistribution dist = next_distribution(cfg.model, full_prefix.digest());
        const std::vector<double> biased = apply_bias(dist.probs, mask, bit, cfg.wm.delta);
        const std::uint32_t tok = sample_token(TokenDistribution{biased}, rng.next_unit());
        tokens.push_back(tok);
        full_prefix.append(tok);
    }
    return tokens;
}

double baseline_match_score(std::span<const std::uint32_t> tokens, const TimeKey& key,
                            std::uint64_t window, const AttackConfig& cfg) {
    if (int(tokens.size()) != cfg.wm.min_length)
        throw std::invalid_argument("baseline_match_score: unexpected document length");
    const BitVec payload = assumed_payload(window, cfg.wm);
    int matched = 0;
    for (int i = 1; i <= cfg.wm.min_length; ++i) {
        const Seed seed = derive_seed(key, nullptr, context_digest(tokens, i));
        const GreenMask mask = greenlist(seed, cfg.wm.vocab_size);
        const int expected = payload[baseline_allocate(i, cfg.wm) - 1];
        if ((mask[tokens[i - 1]] ? 1 : 0) == expected) ++matched;
    }
    return double(matched) / double(cfg.wm.min_length);
}

bool baseline_verify(std::span<const std::uint32_t> tokens, const TimeKey& key,
                     std::uint64_t window, const AttackConfig& cfg) {
    return baseline_match_score(tokens, key, window, cfg) >= cfg.wm.phi;
}

AttackCorpus collect_corpus(WatermarkMode mode, int docs, const AttackConfig& cfg,
                            const TimeKey& window_key) {
    if (docs < 1) throw std::invalid_argument("collect_corpus: need at least one document");
    AttackCorpus corpus;
    corpus.mode = mode;
    corpus.entries.reserve(docs);
    for (int d = 0; d < docs; ++d) {
        CorpusEntry entry;
        entry.window = cfg.target_window;
        if (mode == WatermarkMode::FixedPayloadBaseline) {
            HashStream rng(derived_seed(cfg, "TimeMark.attack.baseline-doc", d));
            entry.tokens = baseline_encode(window_key, cfg.target_window, cfg, rng);
            const BitVec payload = assumed_payload(cfg.target_window, cfg.wm);
            entry.generator_bits.resize(cfg.wm.min_length);
            for (int i = 1; i <= cfg.wm.min_length; ++i)
                entry.generator_bits[i - 1] = payload[baseline_allocate(i, cfg.wm) - 1];
        } else {
            GenerationRequest req;
            req.window = TimeWindow{cfg.target_window, cfg.wm.granularity_seconds};
            req.length = cfg.wm.min_length;
            req.cfg = cfg.wm;
            req.model = cfg.model;
            std::uint64_t doc_seed = 0;
            const Digest32 ds = derived_seed(cfg, "TimeMark.attack.timemark-doc", d);
            for (int i = 0; i < 8; ++i) doc_seed = (doc_seed << 8) | ds[i];
            req.rng_seed = doc_seed;
            EncodeTrace trace;
            entry.tokens = encode_document(req, window_key, &trace).tokens;
            entry.generator_bits.resize(cfg.wm.min_length);
            for (int i = 0; i < cfg.wm.min_length; ++i)
                entry.generator_bits[i] = std::uint8_t(trace.positions[i].bit);
        }
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

std::vector<TrainingTriplet> build_triplets(const AttackCorpus& corpus, const AttackConfig& cfg) {
    const BitVec payload = assumed_payload(cfg.target_window, cfg.wm);
    std::vector<TrainingTriplet> triplets;
    triplets.reserve(corpus.entries.size() * cfg.wm.min_length);
    for (const CorpusEntry& entry : corpus.entries) {
        for (int i = 1; i <= int(entry.tokens.size()); ++i) {
            TrainingTriplet t;
            t.context = i == 1 ? cfg.wm.vocab_size : entry.tokens[i - 2];
            t.token = entry.tokens[i - 1];
            t.label = payload[baseline_allocate(i, cfg.wm) - 1];
            triplets.push_back(t);
        }
    }
    return triplets;
}

SurrogateClassifier train_surrogate(std::span<const TrainingTriplet> triplets,
                                    const AttackConfig& cfg) {
    if (triplets.empty()) throw std::invalid_argument("train_surrogate: no training data");
    SurrogateClassifier clf;
    clf.weights.assign(cfg.buckets, 0.0f);
    clf.bias = 0.0f;

    std::vector<std::uint32_t> order(triplets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = std::uint32_t(i);
    HashStream shuffle(derived_seed(cfg, "TimeMark.attack.train", 0));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i >= 1; --i)
            std::swap(order[i], order[shuffle.uniform_below(std::uint32_t(i + 1))]);
        const double lr = cfg.learning_rate / (1.0 + 0.5 * epoch);
        double loss = 0.0;
        for (std::uint32_t idx : order) {
            const TrainingTriplet& t = triplets[idx];
            const std::uint32_t b = feature_bucket(t.context, t.token, cfg.buckets);
            const double z = double(clf.weights[b]) + clf.bias;
            const double p = sigmoid(z);
            const double grad = p - double(t.label);
            clf.weights[b] -= float(lr * grad);
            clf.bias -= float(lr * grad * 0.1);
            loss += t.label ? -std::log(std::max(p, 1e-12)) : -std::log(std::max(1.0 - p, 1e-12));
        }
        if (!std::isfinite(loss) || !std::isfinite(clf.bias)) {
            std::ostringstream os;
            os << "train_surrogate: diverged at epoch " << epoch << " (loss=" << loss
               << ", bias=" << clf.bias << "); lower the learning rate";
            throw std::runtime_error(os.str());
        }
    }
    return clf;
}

double surrogate_score(const SurrogateClassifier& clf, std::uint32_t context,
                       std::uint32_t token) {
    return clf.score(context, token);
}

std::vector<std::uint32_t> forge_document(const SurrogateClassifier& clf,
                                          std::uint64_t target_window, double lambda,
                                          const AttackConfig& cfg, HashStream& rng) {
    if (lambda < 0) throw std::invalid_argument("forge_document: lambda must be non-negative");
    const BitVec targets = assumed_payload(target_window, cfg.wm);
    std::vector<std::uint32_t> tokens;
    tokens.reserve(cfg.wm.min_length);
    PrefixHasher full_prefix;
    std::vector<double> reweighted(cfg.wm.vocab_size);
    for (int i = 1; i <= cfg.wm.min_length; ++i) {
        const std::uint32_t context = i == 1 ? cfg.wm.vocab_size : tokens[i - 2];
        const int y = targets[baseline_allocate(i, cfg.wm) - 1];
        const double direction = lambda * double(2 * y - 1);
        const TokenDistribution dist = next_distribution(cfg.model, full_prefix.digest());
        double total = 0.0;
        for (std::uint32_t v = 0; v < cfg.wm.vocab_size; ++v) {
            const double shift =
                std::clamp(direction * clf.score(context, v), -kScoreClamp, kScoreClamp);
            reweighted[v] = dist.probs[v] * std::exp(shift);
            total += reweighted[v];
        }
        double u = rng.next_unit() * total;
        std::uint32_t tok = cfg.wm.vocab_size - 1;
        double cum = 0.0;
        for (std::uint32_t v = 0; v < cfg.wm.vocab_size; ++v) {
            cum += reweighted[v];
            if (u < cum) {
                tok = v;
                break;
            }
        }
        tokens.push_back(tok);
        full_prefix.append(tok);
    }
    return tokens;
}

ModeResult evaluate_mode(WatermarkMode mode, const AttackConfig& cfg) {
    cfg.wm.validate();
    if (cfg.model.vocab_size != cfg.wm.vocab_size)
        throw std::invalid_argument("evaluate_mode: model and config vocabulary sizes differ");

    TimeKey key{tagged_seed_u64("TimeMark.attack.root", cfg.seed)};
    for (std::uint64_t t = 0; t < cfg.target_window; ++t) key = evolve(key);

    const AttackCorpus corpus = collect_corpus(mode, cfg.corpus_docs, cfg, key);
    std::vector<TrainingTriplet> triplets = build_triplets(corpus, cfg);

    HashStream split_rng(derived_seed(cfg, "TimeMark.attack.split", std::uint64_t(mode)));
    for (std::size_t i = triplets.size() - 1; i >= 1; --i)
        std::swap(triplets[i], triplets[split_rng.uniform_below(std::uint32_t(i + 1))]);
    const std::size_t train_size = triplets.size() * 4 / 5;
    const std::span<const TrainingTriplet> train(triplets.data(), train_size);
    const std::span<const TrainingTriplet> heldout(triplets.data() + train_size,
                                                   triplets.size() - train_size);

    const SurrogateClassifier clf = train_surrogate(train, cfg);

    ModeResult result;
    result.mode = mode;
    result.train_size = train_size;
    result.heldout_size = heldout.size();
    std::size_t correct = 0;
    std::size_t class_total[2] = {0, 0}, class_correct[2] = {0, 0};
    for (const TrainingTriplet& t : heldout) {
        const int predicted = clf.score(t.context, t.token) > 0.0 ? 1 : 0;
        ++class_total[t.label];
        if (predicted == int(t.label)) {
            ++correct;
            ++class_correct[t.label];
        }
    }
    result.raw_accuracy = double(correct) / double(heldout.size());
    const double recall0 = class_total[0] ? double(class_correct[0]) / class_total[0] : 0.0;
    const double recall1 = class_total[1] ? double(class_correct[1]) / class_total[1] : 0.0;
    result.balanced_accuracy = 0.5 * (recall0 + recall1);
    const double var0 = class_total[0] ? recall0 * (1 - recall0) / class_total[0] : 0.0;
    const double var1 = class_total[1] ? recall1 * (1 - recall1) / class_total[1] : 0.0;
    result.sigma_balanced = 0.5 * std::sqrt(var0 + var1);
    result.ci_low = result.balanced_accuracy - 1.96 * result.sigma_balanced;
    result.ci_high = result.balanced_accuracy + 1.96 * result.sigma_balanced;

    result.forgeries = cfg.forgeries;
    for (int f = 0; f < cfg.forgeries; ++f) {
        HashStream rng(derived_seed(cfg, "TimeMark.attack.forge", (std::uint64_t(mode) << 32) | f));
        const std::vector<std::uint32_t> forged =
            forge_document(clf, cfg.target_window, cfg.lambda, cfg, rng);
        bool pass = false;
        if (mode == WatermarkMode::FixedPayloadBaseline) {
            pass = baseline_verify(forged, key, cfg.target_window, cfg);
        } else {
            const std::vector<PrefixDigest> digests = prefix_digests(forged);
            pass = verify_window(forged, digests, key, cfg.target_window, cfg.wm).pass;
        }
        if (pass) ++result.forged_passes;
    }
    result.forged_pass_rate = double(result.forged_passes) / double(cfg.forgeries);

    const int verify_count = mode == WatermarkMode::FixedPayloadBaseline
                                 ? cfg.wm.min_length
                                 : cfg.wm.stage1_length();
    result.false_acceptance_floor = false_acceptance_prob(verify_count, cfg.wm.phi).value;
    return result;
}

AttackResult evaluate_attack(const AttackConfig& cfg) {
    AttackResult result;
    result.baseline = evaluate_mode(WatermarkMode::FixedPayloadBaseline, cfg);
    result.timemark = evaluate_mode(WatermarkMode::TimeMark, cfg);
    return result;
}

namespace {

nlohmann::json mode_json(const ModeResult& r) {
    return {{"mode", to_string(r.mode)},
            {"train_size", r.train_size},
            {"heldout_size", r.heldout_size},
            {"raw_accuracy", r.raw_accuracy},
            {"balanced_accuracy", r.balanced_accuracy},
            {"sigma_balanced", r.sigma_balanced},
            {"ci95", {r.ci_low, r.ci_high}},
            {"forgeries", r.forgeries},
            {"forged_passes", r.forged_passes},
            {"forged_pass_rate", r.forged_pass_rate},
            {"false_acceptance_floor", r.false_acceptance_floor}};
}

}  // namespace

nlohmann::json AttackResult::to_json() const {
    return {{"baseline", mode_json(baseline)}, {"timemark", mode_json(timemark)}};
}

std::string AttackResult::to_table() const {
    std::ostringstream os;
    os.precision(4);
    auto row = [&os](const ModeResult& r) {
        os << "  " << to_string(r.mode) << ": balanced accuracy " << r.balanced_accuracy << " (ci "
           << r.ci_low << ".." << r.ci_high << ", heldout " << r.heldout_size << "), forged passes "
           << r.forged_passes << "/" << r.forgeries << " (floor " << r.false_acceptance_floor
           << ")\n";
    };
    os << "surrogate attack\n";
    row(baseline);
    row(timemark);
    return os.str();
}

}  // namespace timemark
