#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "timemark/sha256.hpp"

namespace timemark {

struct TimeWindow {
    std::uint64_t index = 0;
    std::uint32_t granularity_seconds = 60;
};

// Maps epoch seconds to a window index relative to the chain origin.
std::uint64_t window_index_for(std::uint64_t epoch_seconds, std::uint64_t origin_epoch,
                               std::uint32_t granularity_seconds);

struct TimeKey {
    Digest32 bytes{};
    std::string hex() const { return digest_to_hex(bytes); }
    bool operator==(const TimeKey&) const = default;
};

// One step of the one-way chain: K_t = SHA-256(K_{t-1}).
TimeKey evolve(const TimeKey& key);

// Derives K_0 from an arbitrary seed string.
TimeKey root_key_from_seed(const std::string& seed);
// Derives K_0 from OS entropy.
TimeKey root_key_random();

enum class Role { Provider, Authority };

enum class AccessError { ProviderPastAccessDenied, WindowNotYetReached };

const char* to_string(Role r);
const char* to_string(AccessError e);

struct AuditRecord {
    Role requester = Role::Provider;
    std::uint64_t requested_index = 0;
    bool granted = false;
    std::uint64_t wall_time = 0;
    std::string action;  // "advance" or "read"
};

// Emulated HSM key store. The provider may only read the key of the current
// window; the supervising authority may read any historical key. Every
// access attempt and every advance appends an audit record.
//
// Callers in different threads of control must serialize access themselves;
// the vault performs no internal locking.
class KeyVault {
  public:
    KeyVault(const TimeKey& root, std::uint32_t granularity_seconds);

    static KeyVault load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    // Moves to the next window: appends H(K_current) to the history.
    void advance(std::uint64_t wall_time = 0);

    std::variant<TimeKey, AccessError> read_key(Role role, std::uint64_t window_index,
                                                std::uint64_t wall_time = 0);

    std::uint64_t current_index() const { return current_; }
    std::uint32_t granularity_seconds() const { return granularity_; }
    const std::vector<AuditRecord>& audit_log() const { return audit_; }
    std::string current_key_digest_hex() const;

  private:
    TimeKey root_;
    std::vector<TimeKey> history_;  // exactly indices 0..current_
    std::uint64_t current_ = 0;
    std::uint32_t granularity_ = 60;
    std::vector<AuditRecord> audit_;
};

}  // namespace timemark
