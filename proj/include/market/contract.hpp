#pragma once

#include <map>

#include "market/ledger.hpp"
#include "market/store.hpp"

namespace market {

enum class ContractEventKind { Deploy, Add, Challenge, Accept, Reject, Refund, Update };

const char* to_string(ContractEventKind kind);

// Row of the contract event export:
// height,contract,event,contribution_id,amount
struct ContractEvent {
    std::uint64_t height = 0;
    Address contract;
    ContractEventKind kind = ContractEventKind::Deploy;
    std::optional<std::uint64_t> contribution_id;
    Currency amount = 0;
};

std::string to_csv_row(const ContractEvent& event);

struct ContractError : std::runtime_error {
    explicit ContractError(std::string name) : std::runtime_error(std::move(name)) {}
};

// Marketplace contract host. All mutation happens inside ledger block
// execution via apply(); reads of sealed state are safe concurrently.
class ContractRegistry final : public TxHandler {
public:
    explicit ContractRegistry(const BlobStore* store = nullptr) : store_(store) {}

    void apply(const Transaction& tx, std::uint64_t height, Ledger& ledger) override;
    Currency held_total() const override;
    void encode_state(std::string& out) const override;

    const ModelContract* find(const Address& id) const;
    const ModelContract& at(const Address& id) const;
    const std::map<Address, ModelContract>& contracts() const { return contracts_; }
    const std::vector<ContractEvent>& events() const { return events_; }

    // Deterministic contract address for a deploy by (sender, nonce).
    static Address contract_address(const Address& sender, std::uint64_t nonce);

    // Lineage walk from a contract back to its root, most recent first.
    std::vector<Address> lineage(const Address& id) const;

    // Effective dataset size: initial declared count + inline contributions
    // (corrections replace, never add) + declared counts of dataset hashes.
    static std::uint64_t dataset_size(const ModelContract& contract);

    // Effective training sequence: inline contributions in id order with
    // forfeited originals replaced by their accepted corrections.
    static std::vector<Sample> effective_samples(const ModelContract& contract);

    // Fold the stored initial model over the effective sequence; the live
    // model must always equal this byte-for-byte.
    static std::string replay_model(const ModelContract& contract);

    // Current effective training set encoding: initial blob text (when the
    // store has it) plus the effective inline samples.
    std::string snapshot_dataset(const Address& id) const;

private:
    void deploy(const Transaction& tx, const DeployPayload& p, std::uint64_t height,
                const std::optional<Address>& predecessor);
    void add_data(const Transaction& tx, const AddDataPayload& p, std::uint64_t height);
    void verify(const Transaction& tx, const VerifyPayload& p, std::uint64_t height);
    void adjudicate(const Transaction& tx, const AdjudicatePayload& p, std::uint64_t height,
                    Ledger& ledger);
    void claim_refund(const Transaction& tx, const ClaimRefundPayload& p, std::uint64_t height,
                      Ledger& ledger);

    void check_data_ref(const ModelContract& contract, const DataRef& data,
                        bool& count_unverified) const;

    const BlobStore* store_;
    std::map<Address, ModelContract> contracts_;
    std::vector<ContractEvent> events_;
};

// Hidden-test evaluation: the payload must hash to the contract's committed
// test digest and decode against its schema. Read-only.
double evaluate_contract(const ModelContract& contract, const std::string& test_payload);

} // namespace market
