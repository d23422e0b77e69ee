#include "timemark/encoder.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace timemark {

namespace {

void validate_length(int length, const WatermarkConfig& cfg) {
    if (length < cfg.stage1_length())
        throw std::invalid_argument("length must be at least alpha * payload_bits");
    if ((length - cfg.stage1_length()) % cfg.payload_bits != 0)
        throw std::invalid_argument("stage-II length must divide evenly across the payload bits");
}

}  // namespace

BitVec sample_payload(HashStream& rng, int info_bits) {
    if (info_bits <= 0) throw std::invalid_argument("sample_payload: info_bits must be positive");
    BitVec r(info_bits);
    for (auto& b : r) b = std::uint8_t(rng.next_bit());
    return r;
}

WatermarkedDocument encode_document(const GenerationRequest& req, const TimeKey& key,
                                    EncodeTrace* trace) {
    req.cfg.validate();
    validate_length(req.length, req.cfg);
    if (req.model.vocab_size != req.cfg.vocab_size)
        throw std::invalid_argument("encode_document: model and config vocabulary sizes differ");
    const BchCode& code = bch63_10();
    if (req.cfg.info_bits != BchCode::k || req.cfg.payload_bits != BchCode::n)
        throw std::invalid_argument("encode_document: config does not match the BCH(63,10) payload");

    HashStream payload_rng(tagged_seed_u64("TimeMark.payload.v1", req.rng_seed));
    HashStream token_rng(tagged_seed_u64("TimeMark.tokens.v1", req.rng_seed));

    const BitVec r = sample_payload(payload_rng, req.cfg.info_bits);
    const BitVec p = code.encode(r);
    if (trace) {
        trace->r = r;
        trace->p = p;
        trace->positions.clear();
        trace->positions.reserve(req.length);
    }

    const int s1 = req.cfg.stage1_length();
    WatermarkedDocument doc;
    doc.tokens.reserve(req.length);
    PrefixHasher hasher;
    for (int i = 1; i <= req.length; ++i) {
        const PrefixDigest prefix = hasher.digest();
        const bool stage1 = i <= s1;
        const Seed seed = stage1 ? derive_seed(key, &r, prefix) : derive_seed(key, nullptr, prefix);
        const GreenMask mask = greenlist(seed, req.cfg.vocab_size);
        const int bit = p[allocate(i, req.cfg) - 1];

        const TokenDistribution dist = next_distribution(req.model, prefix);
        const std::vector<double> biased = apply_bias(dist.probs, mask, bit, req.cfg.delta);
        const std::uint32_t tok =
            sample_token(TokenDistribution{biased}, token_rng.next_unit());

        doc.tokens.push_back(tok);
        hasher.append(tok);
        if (trace) trace->positions.push_back({stage1 ? 1 : 2, bit, mask[tok] != 0});
    }
    return doc;
}

WatermarkedDocument generate_plain(const SyntheticModel& model, int length,
                                   std::uint64_t rng_seed) {
    if (length <= 0) throw std::invalid_argument("generate_plain: length must be positive");
    HashStream token_rng(tagged_seed_u64("TimeMark.tokens.v1", rng_seed));
    WatermarkedDocument doc;
    doc.tokens.reserve(length);
    PrefixHasher hasher;
    for (int i = 0; i < length; ++i) {
        const TokenDistribution dist = next_distribution(model, hasher.digest());
        const std::uint32_t tok = sample_token(dist, token_rng.next_unit());
        doc.tokens.push_back(tok);
        hasher.append(tok);
    }
    return doc;
}

void write_documents_jsonl(const std::filesystem::path& file,
                           const std::vector<WatermarkedDocument>& docs) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_documents_jsonl: cannot open " + file.string());
    for (const WatermarkedDocument& doc : docs) {
        const nlohmann::json j = {{"tokens", doc.tokens}};
        out << j.dump() << "\n";
    }
}

std::vector<WatermarkedDocument> read_documents_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_documents_jsonl: cannot open " + file.string());
    std::vector<WatermarkedDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        WatermarkedDocument doc;
        doc.tokens = j.at("tokens").get<std::vector<std::uint32_t>>();
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace timemark
