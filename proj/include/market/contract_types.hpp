#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "market/address.hpp"
#include "market/currency.hpp"
#include "market/hash.hpp"
#include "market/model.hpp"

namespace market {

// Deposit/reward/timeout triple driving the incentive mechanism. A single
// forfeited deposit must be able to fund one reward, hence reward <= deposit.
struct IncentiveParams {
    Currency deposit = 0;
    Currency reward = 0;
    std::uint64_t timeout_blocks = 1;

    bool valid() const
    {
        return deposit > 0 && reward >= 0 && reward <= deposit && timeout_blocks >= 1;
    }
};

// Reference to a dataset stored off-contract, addressed by content hash.
struct DatasetHashRef {
    ContentHash hash;
    std::uint64_t declared_count = 1;

    auto operator<=>(const DatasetHashRef&) const = default;
};

// A contribution is either a single inline sample (trained on-chain) or a
// dataset hash (registered for off-chain training only).
using DataRef = std::variant<Sample, DatasetHashRef>;

bool data_ref_equal(const DataRef& a, const DataRef& b);

enum class ContributionStatus {
    Pending,   // awaiting timeout or challenge
    Challenged, // open challenge, awaiting owner adjudication
    Refunded,  // terminal: deposit returned after timeout
    Forfeited, // terminal: challenge accepted, deposit paid to the verifier
};

const char* to_string(ContributionStatus status);

enum class ChallengeOutcome { Open, Accepted, Rejected };

struct Challenge {
    Address verifier;
    DataRef correction;
    Currency deposit_held = 0;
    ChallengeOutcome outcome = ChallengeOutcome::Open;
};

// One data submission with its full challenge history. A rejected challenge
// forfeits the verifier's stake and returns the contribution to Pending,
// still aging from the original submission height.
struct ContributionRecord {
    std::uint64_t id = 0;
    Address contributor;
    DataRef data;
    Currency deposit_held = 0;
    ContributionStatus status = ContributionStatus::Pending;
    std::uint64_t submitted_at = 0;
    std::vector<Challenge> challenges;

    // Set when a dataset-hash count could not be checked against a local blob.
    bool count_unverified = false;

    const Challenge* open_challenge() const;
    const Challenge* accepted_challenge() const;
};

struct ModelContract {
    Address id;
    Address owner;
    std::string model_bytes;         // live model, canonical encoding
    std::string initial_model_bytes; // deploy-time model, replay base
    int feature_dim = 0;
    std::vector<int> class_set;
    std::vector<ContributionRecord> contributions; // append-only, dense ids
    ContentHash initial_data_hash;
    std::uint64_t initial_count = 0;
    ContentHash test_digest; // the test payload itself is never stored
    IncentiveParams params;
    Currency reward_pool = 0;
    std::optional<Address> predecessor;

    // Total currency held by this contract (escrows + pool).
    Currency held_total() const;
};

} // namespace market
