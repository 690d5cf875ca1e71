#include "market/chain.hpp"

#include <sstream>

namespace market {

Chain::Chain(std::vector<std::pair<Address, Currency>> genesis_accounts,
             std::uint64_t blocktime_seconds, const BlobStore* store)
    : genesis_accounts_(std::move(genesis_accounts)),
      registry_(store),
      ledger_(Ledger::genesis(genesis_accounts_, blocktime_seconds))
{
    ledger_.set_handler(&registry_);
    // Genesis digest must cover the (empty) contract section too.
    // Ledger::genesis sealed block 0 before the handler was attached, which
    // produces the same "contracts 0" encoding, so digests agree.
}

Chain::Chain(Chain&& other) noexcept
    : genesis_accounts_(std::move(other.genesis_accounts_)),
      registry_(std::move(other.registry_)),
      ledger_(std::move(other.ledger_)),
      pending_nonces_(std::move(other.pending_nonces_))
{
    // The ledger's handler pointer must follow the registry it moved with.
    ledger_.set_handler(&registry_);
}

std::uint64_t Chain::submit(const Address& sender, Currency value, TxPayload payload)
{
    std::uint64_t base = ledger_.has_account(sender) ? ledger_.nonce_of(sender) : 0;
    std::uint64_t offset = pending_nonces_[sender]++;
    Transaction tx;
    tx.sender = sender;
    tx.nonce = base + offset;
    tx.value = value;
    tx.payload = std::move(payload);
    ledger_.submit(std::move(tx));
    return base + offset;
}

TxReceipt Chain::apply_one(const Address& sender, Currency value, TxPayload payload)
{
    submit(sender, value, std::move(payload));
    const Block& block = seal();
    return block.receipts.back();
}

Address Chain::next_contract_address(const Address& sender) const
{
    std::uint64_t base = ledger_.has_account(sender) ? ledger_.nonce_of(sender) : 0;
    auto it = pending_nonces_.find(sender);
    if (it != pending_nonces_.end()) {
        base += it->second;
    }
    return ContractRegistry::contract_address(sender, base);
}

std::string Chain::journal() const
{
    std::string out = "chain v1\n";
    out += "blocktime " + std::to_string(ledger_.blocktime_seconds()) + "\n";
    out += "genesis " + std::to_string(genesis_accounts_.size()) + "\n";
    for (const auto& [addr, balance] : genesis_accounts_) {
        out += addr.hex() + " " + std::to_string(balance) + "\n";
    }
    for (const Block& block : ledger_.blocks()) {
        out += encode_block(block);
    }
    return out;
}

Chain Chain::load_journal(const std::string& text, const BlobStore* store)
{
    std::istringstream in(text);
    std::string line;
    auto expect_line = [&](const std::string& prefix) {
        if (!std::getline(in, line) || !line.starts_with(prefix)) {
            throw ReplayError("malformed journal at '" + prefix + "'");
        }
        return line.substr(prefix.size());
    };
    if (expect_line("chain ") != "v1") {
        throw ReplayError("unsupported journal version");
    }
    std::uint64_t blocktime = std::stoull(expect_line("blocktime "));
    std::size_t n_accounts = std::stoull(expect_line("genesis "));
    std::vector<std::pair<Address, Currency>> genesis_accounts;
    for (std::size_t i = 0; i < n_accounts; ++i) {
        if (!std::getline(in, line)) {
            throw ReplayError("truncated genesis section");
        }
        std::istringstream row(line);
        std::string hex;
        Currency balance = 0;
        row >> hex >> balance;
        auto addr = Address::from_hex(hex);
        if (!addr) {
            throw ReplayError("bad genesis address");
        }
        genesis_accounts.emplace_back(*addr, balance);
    }

    // Remaining text is a sequence of encoded blocks.
    std::vector<Block> blocks;
    std::string current;
    while (std::getline(in, line)) {
        if (line == "block v1" && !current.empty()) {
            blocks.push_back(parse_block(current));
            current.clear();
        }
        current += line + "\n";
    }
    if (!current.empty()) {
        blocks.push_back(parse_block(current));
    }

    Chain chain(std::move(genesis_accounts), blocktime, store);
    if (blocks.empty() || blocks.front().height != 0) {
        throw ReplayError("journal missing genesis block");
    }
    if (encode_block(blocks.front()) != encode_block(chain.ledger_.blocks().front())) {
        throw ReplayError("genesis block mismatch");
    }
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const Block& recorded = blocks[i];
        if (recorded.height != blocks[i - 1].height + 1) {
            throw ReplayError("chain gap at height " + std::to_string(recorded.height));
        }
        for (const Transaction& tx : recorded.transactions) {
            chain.ledger_.submit(tx);
        }
        const Block& resealed = chain.ledger_.seal_block();
        if (encode_block(resealed) != encode_block(recorded)) {
            throw ReplayError("divergence at height " + std::to_string(recorded.height));
        }
    }
    return chain;
}

} // namespace market
