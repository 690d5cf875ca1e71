#include "market/ledger.hpp"

namespace market {

Ledger Ledger::genesis(const std::vector<std::pair<Address, Currency>>& accounts,
                       std::uint64_t blocktime_seconds)
{
    Ledger led;
    led.blocktime_ = blocktime_seconds;
    for (const auto& [addr, balance] : accounts) {
        if (balance < 0) {
            throw std::invalid_argument("negative genesis balance for " + addr.hex());
        }
        if (!led.accounts_.emplace(addr, Account{addr, balance, 0}).second) {
            throw std::invalid_argument("duplicate genesis address " + addr.hex());
        }
        led.supply_ += balance;
    }
    Block genesis_block;
    genesis_block.height = 0;
    genesis_block.timestamp = 0;
    genesis_block.state_digest = led.state_digest();
    led.blocks_.push_back(std::move(genesis_block));
    return led;
}

std::size_t Ledger::submit(Transaction tx)
{
    pending_.push_back(std::move(tx));
    return pending_.size() - 1;
}

void Ledger::credit(const Address& addr, Currency amount)
{
    auto it = accounts_.find(addr);
    if (it == accounts_.end()) {
        throw TxError("UnknownAccount");
    }
    it->second.balance += amount;
}

void Ledger::debit(const Address& addr, Currency amount)
{
    auto it = accounts_.find(addr);
    if (it == accounts_.end()) {
        throw TxError("UnknownAccount");
    }
    if (it->second.balance < amount) {
        throw TxError("InsufficientBalance");
    }
    it->second.balance -= amount;
}

void Ledger::execute(const Transaction& tx, std::uint64_t height, std::size_t tx_index,
                     TxReceipt& receipt)
{
    receipt.status = TxStatus::Rejected;
    auto it = accounts_.find(tx.sender);
    if (it == accounts_.end()) {
        receipt.reason = "UnknownSender";
        return;
    }
    if (tx.nonce != it->second.nonce) {
        receipt.reason = "BadNonce";
        return;
    }
    if (tx.value < 0) {
        receipt.reason = "NegativeValue";
        return;
    }
    if (it->second.balance < tx.value) {
        receipt.reason = "InsufficientBalance";
        return;
    }

    if (const auto* transfer = std::get_if<TransferPayload>(&tx.payload)) {
        auto to = accounts_.find(transfer->to);
        if (to == accounts_.end()) {
            receipt.reason = "UnknownRecipient";
            return;
        }
        it->second.balance -= tx.value;
        to->second.balance += tx.value;
    } else {
        if (handler_ == nullptr) {
            receipt.reason = "NoContractHost";
            return;
        }
        // Attached value moves into contract custody; rolled back on reject.
        it->second.balance -= tx.value;
        try {
            handler_->apply(tx, height, *this);
        } catch (const TxError& e) {
            accounts_.find(tx.sender)->second.balance += tx.value;
            receipt.reason = e.what();
            return;
        }
    }
    accounts_.find(tx.sender)->second.nonce += 1;
    receipt.status = TxStatus::Applied;
    receipt.reason.clear();
    (void)tx_index;
}

const Block& Ledger::seal_block()
{
    Block block;
    block.height = blocks_.back().height + 1;
    block.timestamp = block.height * blocktime_;
    block.parent_digest = digest(encode_block(blocks_.back()));
    block.transactions = std::move(pending_);
    pending_.clear();
    block.receipts.resize(block.transactions.size());
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        execute(block.transactions[i], block.height, i, block.receipts[i]);
        events_.push_back(LedgerEvent{block.height, i, block.transactions[i].kind(),
                                      block.transactions[i].sender, block.transactions[i].value,
                                      block.receipts[i].status});
    }
    block.state_digest = state_digest();
    blocks_.push_back(std::move(block));
    return blocks_.back();
}

Currency Ledger::balance_of(const Address& addr) const
{
    auto it = accounts_.find(addr);
    if (it == accounts_.end()) {
        throw std::out_of_range("unknown address " + addr.hex());
    }
    return it->second.balance;
}

bool Ledger::has_account(const Address& addr) const
{
    return accounts_.contains(addr);
}

std::uint64_t Ledger::nonce_of(const Address& addr) const
{
    auto it = accounts_.find(addr);
    if (it == accounts_.end()) {
        throw std::out_of_range("unknown address " + addr.hex());
    }
    return it->second.nonce;
}

std::uint64_t Ledger::height() const
{
    return blocks_.back().height;
}

std::string Ledger::encode_state() const
{
    std::string out = "state v1\n";
    out += "height " + std::to_string(blocks_.empty() ? 0 : blocks_.back().height) + "\n";
    out += "supply " + std::to_string(supply_) + "\n";
    out += "blocktime " + std::to_string(blocktime_) + "\n";
    out += "accounts " + std::to_string(accounts_.size()) + "\n";
    for (const auto& [addr, account] : accounts_) {
        out += addr.hex() + " " + std::to_string(account.balance) + " " +
               std::to_string(account.nonce) + "\n";
    }
    if (handler_ != nullptr) {
        handler_->encode_state(out);
    } else {
        out += "contracts 0\n";
    }
    return out;
}

ContentHash Ledger::state_digest() const
{
    return digest(encode_state());
}

Currency Ledger::circulating_total() const
{
    Currency total = handler_ != nullptr ? handler_->held_total() : 0;
    for (const auto& [addr, account] : accounts_) {
        total += account.balance;
    }
    return total;
}

Ledger replay(const std::vector<std::pair<Address, Currency>>& genesis_accounts,
              std::uint64_t blocktime_seconds, const std::vector<Block>& chain,
              TxHandler* handler)
{
    Ledger led = Ledger::genesis(genesis_accounts, blocktime_seconds);
    led.set_handler(handler);
    if (chain.empty()) {
        return led;
    }
    if (chain.front().height != 0 ||
        encode_block(chain.front()) != encode_block(led.blocks().front())) {
        throw ReplayError("genesis block mismatch");
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const Block& recorded = chain[i];
        if (recorded.height != chain[i - 1].height + 1) {
            throw ReplayError("chain gap at height " + std::to_string(recorded.height));
        }
        for (const Transaction& tx : recorded.transactions) {
            led.submit(tx);
        }
        const Block& resealed = led.seal_block();
        if (encode_block(resealed) != encode_block(recorded)) {
            throw ReplayError("divergence at height " + std::to_string(recorded.height));
        }
    }
    return led;
}

} // namespace market
