#pragma once

#include <map>
#include <stdexcept>

#include "market/tx.hpp"

namespace market {

// Thrown by transaction handlers to reject the current transaction. The
// name becomes the receipt reason; all handler-side checks must precede
// any state mutation so a throw leaves state untouched.
struct TxError : std::runtime_error {
    explicit TxError(std::string name) : std::runtime_error(std::move(name)) {}
};

struct Account {
    Address address;
    Currency balance = 0;
    std::uint64_t nonce = 0;
};

class Ledger;

// Executes contract-kind transactions inside block sealing. The attached
// value has already been debited from the sender when apply() runs; a throw
// rolls that debit back.
class TxHandler {
public:
    virtual ~TxHandler() = default;
    virtual void apply(const Transaction& tx, std::uint64_t height, Ledger& ledger) = 0;
    virtual Currency held_total() const = 0;
    virtual void encode_state(std::string& out) const = 0;
};

struct LedgerEvent {
    std::uint64_t height = 0;
    std::size_t tx_index = 0;
    TxKind kind = TxKind::Transfer;
    Address sender;
    Currency value = 0;
    TxStatus status = TxStatus::Applied;
};

// Deterministic single-sealer account/block state machine. Transactions are
// queued by submit() and executed in submission order by seal_block().
// Execution is strictly sequential; reads against sealed state are safe
// from any thread once sealing is done.
class Ledger {
public:
    static Ledger genesis(const std::vector<std::pair<Address, Currency>>& accounts,
                          std::uint64_t blocktime_seconds = 15);

    void set_handler(TxHandler* handler) { handler_ = handler; }

    // Queue for the next block; returns the queue index. Validation happens
    // at execution time, the receipt is readable from the sealed block.
    std::size_t submit(Transaction tx);

    const Block& seal_block();

    Currency balance_of(const Address& addr) const;
    bool has_account(const Address& addr) const;
    std::uint64_t nonce_of(const Address& addr) const;
    Currency total_supply() const { return supply_; }
    std::uint64_t height() const;
    std::uint64_t blocktime_seconds() const { return blocktime_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::map<Address, Account>& accounts() const { return accounts_; }
    const std::vector<LedgerEvent>& events() const { return events_; }
    std::size_t pending_count() const { return pending_.size(); }

    // Canonical post-state encoding (accounts plus handler state); its
    // digest is the block's state_digest. Documented in docs/ENCODING.md.
    std::string encode_state() const;
    ContentHash state_digest() const;

    // Sum of account balances plus everything held by the handler; equals
    // total_supply() at every sealed height.
    Currency circulating_total() const;

    // For handler use during apply(): move value between accounts. Credit
    // to an unknown address or an overdraft throws TxError.
    void credit(const Address& addr, Currency amount);
    void debit(const Address& addr, Currency amount);

private:
    Ledger() = default;

    void execute(const Transaction& tx, std::uint64_t height, std::size_t tx_index,
                 TxReceipt& receipt);

    std::map<Address, Account> accounts_;
    std::vector<Transaction> pending_;
    std::vector<Block> blocks_;
    std::vector<LedgerEvent> events_;
    Currency supply_ = 0;
    std::uint64_t blocktime_ = 15;
    TxHandler* handler_ = nullptr;
};

// Rebuild a ledger by re-executing a recorded chain against a fresh handler
// and verify every state digest. Throws on gaps or divergence.
struct ReplayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Ledger replay(const std::vector<std::pair<Address, Currency>>& genesis_accounts,
              std::uint64_t blocktime_seconds, const std::vector<Block>& chain,
              TxHandler* handler);

} // namespace market
