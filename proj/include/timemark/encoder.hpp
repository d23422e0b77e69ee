#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "timemark/bch.hpp"
#include "timemark/keychain.hpp"
#include "timemark/token_source.hpp"
#include "timemark/wm_core.hpp"

namespace timemark {

struct GenerationRequest {
    TimeWindow window;
    int length = 945;  // L
    WatermarkConfig cfg;
    SyntheticModel model;
    std::uint64_t rng_seed = 0;  // drives both the payload draw and token sampling
};

// A watermarked document is nothing but its token IDs; the watermark is the
// only channel and no metadata is attached.
struct WatermarkedDocument {
    std::vector<std::uint32_t> tokens;
};

struct PositionRecord {
    int stage = 0;            // 1 or 2
    int bit = 0;              // payload bit targeted at this position
    bool token_in_green = false;
};

// Debug instrumentation only; the payload is never persisted in normal use.
struct EncodeTrace {
    BitVec r;
    BitVec p;
    std::vector<PositionRecord> positions;
};

// m independent uniform bits from the request's random stream.
BitVec sample_payload(HashStream& rng, int info_bits);

// The two-stage biased generation loop. Stage I seeds include the fresh
// random sequence R, Stage II seeds do not. The trace pointer may be null.
WatermarkedDocument encode_document(const GenerationRequest& req, const TimeKey& key,
                                    EncodeTrace* trace = nullptr);

// Plain autoregressive sampling with no watermark machinery at all.
WatermarkedDocument generate_plain(const SyntheticModel& model, int length,
                                   std::uint64_t rng_seed);

// JSON-lines persistence: one {"tokens": [...]} object per line.
void write_documents_jsonl(const std::filesystem::path& file,
                           const std::vector<WatermarkedDocument>& docs);
std::vector<WatermarkedDocument> read_documents_jsonl(const std::filesystem::path& file);

}  // namespace timemark
