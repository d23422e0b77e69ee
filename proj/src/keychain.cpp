#include "timemark/keychain.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace timemark {

std::uint64_t window_index_for(std::uint64_t epoch_seconds, std::uint64_t origin_epoch,
                               std::uint32_t granularity_seconds) {
    if (granularity_seconds == 0)
        throw std::invalid_argument("window_index_for: granularity must be positive");
    if (epoch_seconds < origin_epoch) return 0;
    return (epoch_seconds - origin_epoch) / granularity_seconds;
}

TimeKey evolve(const TimeKey& key) {
    return TimeKey{Sha256::digest(key.bytes.data(), key.bytes.size())};
}

TimeKey root_key_from_seed(const std::string& seed) {
    return TimeKey{tagged_seed("TimeMark.root.v1", std::span<const std::uint8_t>(
                                                       reinterpret_cast<const std::uint8_t*>(seed.data()),
                                                       seed.size()))};
}

TimeKey root_key_random() {
    std::random_device rd;
    std::array<std::uint8_t, 32> raw;
    for (std::size_t i = 0; i < raw.size(); i += 4) {
        const std::uint32_t v = rd();
        raw[i] = std::uint8_t(v >> 24);
        raw[i + 1] = std::uint8_t(v >> 16);
        raw[i + 2] = std::uint8_t(v >> 8);
        raw[i + 3] = std::uint8_t(v);
    }
    return TimeKey{Sha256::digest(raw.data(), raw.size())};
}

const char* to_string(Role r) { return r == Role::Provider ? "provider" : "authority"; }

const char* to_string(AccessError e) {
    return e == AccessError::ProviderPastAccessDenied ? "ProviderPastAccessDenied"
                                                      : "WindowNotYetReached";
}

KeyVault::KeyVault(const TimeKey& root, std::uint32_t granularity_seconds)
    : root_(root), granularity_(granularity_seconds) {
    if (granularity_ == 0) throw std::invalid_argument("KeyVault: granularity must be positive");
    history_.push_back(root_);
}

void KeyVault::advance(std::uint64_t wall_time) {
    history_.push_back(evolve(history_.back()));
    ++current_;
    audit_.push_back({Role::Provider, current_, true, wall_time, "advance"});
}

std::variant<TimeKey, AccessError> KeyVault::read_key(Role role, std::uint64_t window_index,
                                                      std::uint64_t wall_time) {
    bool granted = false;
    std::variant<TimeKey, AccessError> result = AccessError::WindowNotYetReached;
    if (window_index > current_) {
        result = AccessError::WindowNotYetReached;
    } else if (role == Role::Provider && window_index < current_) {
        result = AccessError::ProviderPastAccessDenied;
    } else {
        granted = true;
        result = history_[window_index];
    }
    audit_.push_back({role, window_index, granted, wall_time, "read"});
    return result;
}

std::string KeyVault::current_key_digest_hex() const {
    return digest_to_hex(Sha256::digest(history_.back().bytes.data(), history_.back().bytes.size()));
}

void KeyVault::save(const std::filesystem::path& file) const {
    nlohmann::json audit = nlohmann::json::array();
    for (const AuditRecord& rec : audit_) {
        audit.push_back({{"role", to_string(rec.requester)},
                         {"index", rec.requested_index},
                         {"granted", rec.granted},
                         {"wall_time", rec.wall_time},
                         {"action", rec.action}});
    }
    const nlohmann::json j = {{"granularity_seconds", granularity_},
                              {"current_index", current_},
                              {"root_hex", root_.hex()},
                              {"current_key_digest", current_key_digest_hex()},
                              {"audit", audit}};
    std::ofstream out(file);
    if (!out) throw std::runtime_error("KeyVault::save: cannot open " + file.string());
    out << j.dump(2) << "\n";
}

KeyVault KeyVault::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("KeyVault::load: cannot open " + file.string());
    nlohmann::json j;
    in >> j;

    KeyVault vault(TimeKey{digest_from_hex(j.at("root_hex").get<std::string>())},
                   j.at("granularity_seconds").get<std::uint32_t>());
    const std::uint64_t index = j.at("current_index").get<std::uint64_t>();
    for (std::uint64_t t = 0; t < index; ++t) {
        vault.history_.push_back(evolve(vault.history_.back()));
    }
    vault.current_ = index;
    if (vault.current_key_digest_hex() != j.at("current_key_digest").get<std::string>())
        throw std::runtime_error("KeyVault::load: current key digest mismatch");

    for (const auto& rec : j.at("audit")) {
        vault.audit_.push_back({rec.at("role").get<std::string>() == "provider" ? Role::Provider
                                                                                : Role::Authority,
                                rec.at("index").get<std::uint64_t>(), rec.at("granted").get<bool>(),
                                rec.at("wall_time").get<std::uint64_t>(),
                                rec.at("action").get<std::string>()});
    }
    return vault;
}

}  // namespace timemark
