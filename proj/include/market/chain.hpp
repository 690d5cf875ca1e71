#pragma once

#include <memory>

#include "market/contract.hpp"

namespace market {

// Ledger + contract host + blob store wired together: the whole simulated
// chain for one scenario or workspace. Single-writer, like the ledger.
class Chain {
public:
    Chain(std::vector<std::pair<Address, Currency>> genesis_accounts,
          std::uint64_t blocktime_seconds, const BlobStore* store);

    Chain(Chain&& other) noexcept;
    Chain& operator=(Chain&&) = delete;
    Chain(const Chain&) = delete;
    Chain& operator=(const Chain&) = delete;

    Ledger& ledger() { return ledger_; }
    const Ledger& ledger() const { return ledger_; }
    ContractRegistry& registry() { return registry_; }
    const ContractRegistry& registry() const { return registry_; }

    // Queue a transaction with the sender's next nonce (accounting for
    // already-queued transactions). Returns the nonce used.
    std::uint64_t submit(const Address& sender, Currency value, TxPayload payload);

    const Block& seal() { pending_nonces_.clear(); return ledger_.seal_block(); }

    // Submit + seal in one step; returns the receipt of that transaction.
    TxReceipt apply_one(const Address& sender, Currency value, TxPayload payload);

    // Contract address a deploy/update submitted now by `sender` will get.
    Address next_contract_address(const Address& sender) const;

    // Full journal: genesis header plus every sealed block, replayable.
    std::string journal() const;

    // Rebuild a chain from a journal, re-executing and verifying digests.
    static Chain load_journal(const std::string& text, const BlobStore* store);

private:
    std::vector<std::pair<Address, Currency>> genesis_accounts_;
    ContractRegistry registry_;
    Ledger ledger_;
    std::map<Address, std::uint64_t> pending_nonces_;
};

} // namespace market
