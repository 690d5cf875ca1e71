#pragma once

#include <string>
#include <variant>
#include <vector>

#include "market/contract_types.hpp"

namespace market {

enum class TxKind {
    Transfer,
    DeployContract,
    AddData,
    AddDatasetHash,
    Verify,
    Adjudicate,
    ClaimRefund,
    UpdateModel,
};

const char* to_string(TxKind kind);

struct TransferPayload {
    Address to;
};

struct DeployPayload {
    std::string model_bytes;
    int feature_dim = 0;
    std::vector<int> class_set;
    ContentHash initial_data_hash;
    std::uint64_t initial_count = 0;
    ContentHash test_digest;
    IncentiveParams params;
};

struct AddDataPayload {
    Address contract;
    DataRef data;
};

struct VerifyPayload {
    Address contract;
    std::uint64_t contribution_id = 0;
    DataRef correction;
};

struct AdjudicatePayload {
    Address contract;
    std::uint64_t contribution_id = 0;
    bool accept = false;
};

struct ClaimRefundPayload {
    Address contract;
    std::uint64_t contribution_id = 0;
};

struct UpdateModelPayload {
    Address predecessor;
    std::string model_bytes;
    ContentHash initial_data_hash;
    std::uint64_t initial_count = 0;
    ContentHash test_digest;
    IncentiveParams params;
};

using TxPayload = std::variant<TransferPayload, DeployPayload, AddDataPayload, VerifyPayload,
                               AdjudicatePayload, ClaimRefundPayload, UpdateModelPayload>;

// value carries the currency attached to the transaction: the transfer
// amount, a contribution/verification deposit, or deploy pool funding.
struct Transaction {
    Address sender;
    std::uint64_t nonce = 0;
    Currency value = 0;
    TxPayload payload;

    TxKind kind() const;
};

enum class TxStatus { Applied, Rejected };

struct TxReceipt {
    TxStatus status = TxStatus::Rejected;
    std::string reason; // error name when rejected
};

struct Block {
    std::uint64_t height = 0;
    std::uint64_t timestamp = 0; // height * blocktime seconds
    std::vector<Transaction> transactions;
    std::vector<TxReceipt> receipts;
    ContentHash parent_digest;
    ContentHash state_digest;
};

// Canonical single-line text encoding; deterministic and round-tripping.
// Documented in docs/ENCODING.md (format v1).
std::string encode_tx(const Transaction& tx);
Transaction parse_tx(const std::string& line);

// Block header + txs + receipts, used for parent digests and the journal.
std::string encode_block(const Block& block);
Block parse_block(const std::string& text);

} // namespace market
