#include "market/contract.hpp"

#include <algorithm>

namespace market {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

std::string bytes_hex(const std::string& bytes)
{
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out += kHexDigits[c >> 4];
        out += kHexDigits[c & 0xf];
    }
    return out;
}

std::string encode_data_ref_state(const DataRef& ref)
{
    if (const auto* s = std::get_if<Sample>(&ref)) {
        std::string out = "inline " + std::to_string(s->label);
        for (Eigen::Index i = 0; i < s->features.size(); ++i) {
            out += " " + format_double(s->features[i]);
        }
        return out;
    }
    const auto& d = std::get<DatasetHashRef>(ref);
    return "hash " + d.hash.hex() + " " + std::to_string(d.declared_count);
}

} // namespace

const Challenge* ContributionRecord::open_challenge() const
{
    if (!challenges.empty() && challenges.back().outcome == ChallengeOutcome::Open) {
        return &challenges.back();
    }
    return nullptr;
}

const Challenge* ContributionRecord::accepted_challenge() const
{
    for (const Challenge& c : challenges) {
        if (c.outcome == ChallengeOutcome::Accepted) {
            return &c;
        }
    }
    return nullptr;
}

Currency ModelContract::held_total() const
{
    Currency held = reward_pool;
    for (const ContributionRecord& record : contributions) {
        held += record.deposit_held;
        for (const Challenge& c : record.challenges) {
            held += c.deposit_held;
        }
    }
    return held;
}

const char* to_string(ContractEventKind kind)
{
    switch (kind) {
    case ContractEventKind::Deploy: return "DEPLOY";
    case ContractEventKind::Add: return "ADD";
    case ContractEventKind::Challenge: return "CHALLENGE";
    case ContractEventKind::Accept: return "ACCEPT";
    case ContractEventKind::Reject: return "REJECT";
    case ContractEventKind::Refund: return "REFUND";
    case ContractEventKind::Update: return "UPDATE";
    }
    return "?";
}

std::string to_csv_row(const ContractEvent& event)
{
    std::string id = event.contribution_id ? std::to_string(*event.contribution_id) : "";
    return std::to_string(event.height) + "," + event.contract.hex() + "," +
           to_string(event.kind) + "," + id + "," + std::to_string(event.amount);
}

Address ContractRegistry::contract_address(const Address& sender, std::uint64_t nonce)
{
    ContentHash h = digest("contract:" + sender.hex() + ":" + std::to_string(nonce));
    Address a;
    std::copy_n(h.bytes.begin(), a.bytes.size(), a.bytes.begin());
    return a;
}

const ModelContract* ContractRegistry::find(const Address& id) const
{
    auto it = contracts_.find(id);
    return it == contracts_.end() ? nullptr : &it->second;
}

const ModelContract& ContractRegistry::at(const Address& id) const
{
    const ModelContract* c = find(id);
    if (c == nullptr) {
        throw ContractError("UnknownContract");
    }
    return *c;
}

void ContractRegistry::apply(const Transaction& tx, std::uint64_t height, Ledger& ledger)
{
    if (const auto* p = std::get_if<DeployPayload>(&tx.payload)) {
        deploy(tx, *p, height, std::nullopt);
    } else if (const auto* p = std::get_if<AddDataPayload>(&tx.payload)) {
        add_data(tx, *p, height);
    } else if (const auto* p = std::get_if<VerifyPayload>(&tx.payload)) {
        verify(tx, *p, height);
    } else if (const auto* p = std::get_if<AdjudicatePayload>(&tx.payload)) {
        adjudicate(tx, *p, height, ledger);
    } else if (const auto* p = std::get_if<ClaimRefundPayload>(&tx.payload)) {
        claim_refund(tx, *p, height, ledger);
    } else if (const auto* p = std::get_if<UpdateModelPayload>(&tx.payload)) {
        if (!contracts_.contains(p->predecessor)) {
            throw TxError("UnknownPredecessor");
        }
        DeployPayload d{p->model_bytes, 0,  {}, p->initial_data_hash,
                        p->initial_count, p->test_digest, p->params};
        const ModelContract& prev = contracts_.at(p->predecessor);
        d.feature_dim = prev.feature_dim;
        d.class_set = prev.class_set;
        deploy(tx, d, height, p->predecessor);
    } else {
        throw TxError("UnsupportedKind");
    }
}

void ContractRegistry::deploy(const Transaction& tx, const DeployPayload& p, std::uint64_t height,
                              const std::optional<Address>& predecessor)
{
    if (!p.params.valid()) {
        throw TxError("InvalidParams");
    }
    if (p.class_set.size() < 2 || p.feature_dim <= 0) {
        throw TxError("InvalidSchema");
    }
    OnlineModel model;
    try {
        model = deserialize_model(p.model_bytes);
    } catch (const ModelError&) {
        throw TxError("MalformedModel");
    }
    if (feature_dim(model) != p.feature_dim) {
        throw TxError("MalformedModel");
    }

    ModelContract contract;
    contract.id = contract_address(tx.sender, tx.nonce);
    contract.owner = tx.sender;
    contract.model_bytes = p.model_bytes;
    contract.initial_model_bytes = p.model_bytes;
    contract.feature_dim = p.feature_dim;
    contract.class_set = p.class_set;
    contract.initial_data_hash = p.initial_data_hash;
    contract.initial_count = p.initial_count;
    contract.test_digest = p.test_digest;
    contract.params = p.params;
    contract.reward_pool = tx.value;
    contract.predecessor = predecessor;

    ContractEventKind kind =
        predecessor ? ContractEventKind::Update : ContractEventKind::Deploy;
    events_.push_back(ContractEvent{height, contract.id, kind, std::nullopt, tx.value});
    contracts_.emplace(contract.id, std::move(contract));
}

void ContractRegistry::check_data_ref(const ModelContract& contract, const DataRef& data,
                                      bool& count_unverified) const
{
    count_unverified = false;
    if (const auto* s = std::get_if<Sample>(&data)) {
        if (s->features.size() != contract.feature_dim || !s->features.allFinite()) {
            throw TxError("SchemaMismatch");
        }
        if (std::find(contract.class_set.begin(), contract.class_set.end(), s->label) ==
            contract.class_set.end()) {
            throw TxError("SchemaMismatch");
        }
        return;
    }
    const auto& d = std::get<DatasetHashRef>(data);
    if (d.declared_count == 0) {
        throw TxError("SchemaMismatch");
    }
    if (store_ != nullptr && store_->has(d.hash)) {
        std::vector<Sample> samples;
        try {
            samples = decode_dataset(store_->get_text(d.hash));
        } catch (const ModelError&) {
            throw TxError("DecodeFailure");
        }
        if (samples.size() != d.declared_count) {
            throw TxError("DeclaredCountMismatch");
        }
    } else {
        count_unverified = true;
    }
}

void ContractRegistry::add_data(const Transaction& tx, const AddDataPayload& p,
                                std::uint64_t height)
{
    auto it = contracts_.find(p.contract);
    if (it == contracts_.end()) {
        throw TxError("UnknownContract");
    }
    ModelContract& contract = it->second;
    if (tx.value != contract.params.deposit) {
        throw TxError("WrongDeposit");
    }
    bool count_unverified = false;
    check_data_ref(contract, p.data, count_unverified);

    ContributionRecord record;
    record.id = contract.contributions.size();
    record.contributor = tx.sender;
    record.data = p.data;
    record.deposit_held = tx.value;
    record.status = ContributionStatus::Pending;
    record.submitted_at = height;
    record.count_unverified = count_unverified;
    contract.contributions.push_back(std::move(record));

    // Inline samples train on-chain immediately; dataset hashes are only
    // registered for off-chain use.
    if (const auto* s = std::get_if<Sample>(&p.data)) {
        OnlineModel model = deserialize_model(contract.model_bytes);
        contract.model_bytes = serialize_model(update(model, *s));
    }
    events_.push_back(ContractEvent{height, contract.id, ContractEventKind::Add,
                                    contract.contributions.back().id, tx.value});
}

void ContractRegistry::verify(const Transaction& tx, const VerifyPayload& p, std::uint64_t height)
{
    auto it = contracts_.find(p.contract);
    if (it == contracts_.end()) {
        throw TxError("UnknownContract");
    }
    ModelContract& contract = it->second;
    if (p.contribution_id >= contract.contributions.size()) {
        throw TxError("UnknownContribution");
    }
    ContributionRecord& record = contract.contributions[p.contribution_id];
    if (record.status == ContributionStatus::Challenged) {
        throw TxError("AlreadyChallenged");
    }
    if (record.status != ContributionStatus::Pending) {
        throw TxError("WrongStatus");
    }
    // Challenges must be opened strictly before the refund window opens.
    if (height >= record.submitted_at + contract.params.timeout_blocks) {
        throw TxError("TimeoutElapsed");
    }
    if (tx.value != contract.params.deposit) {
        throw TxError("WrongDeposit");
    }
    if (p.correction.index() != record.data.index()) {
        throw TxError("SchemaMismatch");
    }
    bool count_unverified = false;
    check_data_ref(contract, p.correction, count_unverified);
    if (data_ref_equal(p.correction, record.data)) {
        throw TxError("IdenticalCorrection");
    }

    record.challenges.push_back(Challenge{tx.sender, p.correction, tx.value,
                                          ChallengeOutcome::Open});
    record.status = ContributionStatus::Challenged;
    events_.push_back(ContractEvent{height, contract.id, ContractEventKind::Challenge,
                                    record.id, tx.value});
}

void ContractRegistry::adjudicate(const Transaction& tx, const AdjudicatePayload& p,
                                  std::uint64_t height, Ledger& ledger)
{
    auto it = contracts_.find(p.contract);
    if (it == contracts_.end()) {
        throw TxError("UnknownContract");
    }
    ModelContract& contract = it->second;
    if (tx.sender != contract.owner) {
        throw TxError("NotOwner");
    }
    if (tx.value != 0) {
        throw TxError("UnexpectedValue");
    }
    if (p.contribution_id >= contract.contributions.size()) {
        throw TxError("UnknownContribution");
    }
    ContributionRecord& record = contract.contributions[p.contribution_id];
    if (record.status != ContributionStatus::Challenged) {
        throw TxError("WrongStatus");
    }
    Challenge& challenge = record.challenges.back();

    if (p.accept) {
        // Contributor's deposit forfeits to the verifier, who also gets the
        // stake back plus a reward drawn from the pool (capped at the pool).
        Currency reward = std::min(contract.params.reward, contract.reward_pool);
        Currency payout = record.deposit_held + challenge.deposit_held + reward;
        contract.reward_pool -= reward;
        record.deposit_held = 0;
        challenge.deposit_held = 0;
        challenge.outcome = ChallengeOutcome::Accepted;
        record.status = ContributionStatus::Forfeited;
        ledger.credit(challenge.verifier, payout);
        contract.model_bytes = replay_model(contract);
        events_.push_back(ContractEvent{height, contract.id, ContractEventKind::Accept,
                                        record.id, payout});
    } else {
        // Spam-challenge deterrent: the verifier's stake replenishes the
        // pool and the contribution keeps aging from its original height.
        Currency forfeited = challenge.deposit_held;
        contract.reward_pool += forfeited;
        challenge.deposit_held = 0;
        challenge.outcome = ChallengeOutcome::Rejected;
        record.status = ContributionStatus::Pending;
        events_.push_back(ContractEvent{height, contract.id, ContractEventKind::Reject,
                                        record.id, forfeited});
    }
}

void ContractRegistry::claim_refund(const Transaction& tx, const ClaimRefundPayload& p,
                                    std::uint64_t height, Ledger& ledger)
{
    auto it = contracts_.find(p.contract);
    if (it == contracts_.end()) {
        throw TxError("UnknownContract");
    }
    ModelContract& contract = it->second;
    if (tx.value != 0) {
        throw TxError("UnexpectedValue");
    }
    if (p.contribution_id >= contract.contributions.size()) {
        throw TxError("UnknownContribution");
    }
    ContributionRecord& record = contract.contributions[p.contribution_id];
    if (tx.sender != record.contributor) {
        throw TxError("WrongClaimant");
    }
    if (record.status != ContributionStatus::Pending) {
        throw TxError("WrongStatus");
    }
    // Inclusive boundary: claimable at exactly submitted_at + timeout.
    if (height < record.submitted_at + contract.params.timeout_blocks) {
        throw TxError("TooEarly");
    }
    Currency refund = record.deposit_held;
    record.deposit_held = 0;
    record.status = ContributionStatus::Refunded;
    ledger.credit(record.contributor, refund);
    events_.push_back(ContractEvent{height, contract.id, ContractEventKind::Refund,
                                    record.id, refund});
}

Currency ContractRegistry::held_total() const
{
    Currency total = 0;
    for (const auto& [id, contract] : contracts_) {
        total += contract.held_total();
    }
    return total;
}

std::vector<Address> ContractRegistry::lineage(const Address& id) const
{
    std::vector<Address> chain;
    const ModelContract* current = &at(id);
    chain.push_back(current->id);
    while (current->predecessor) {
        current = &at(*current->predecessor);
        chain.push_back(current->id);
    }
    return chain;
}

std::uint64_t ContractRegistry::dataset_size(const ModelContract& contract)
{
    std::uint64_t size = contract.initial_count;
    for (const ContributionRecord& record : contract.contributions) {
        if (const auto* d = std::get_if<DatasetHashRef>(&record.data)) {
            size += d->declared_count;
        } else {
            size += 1;
        }
    }
    return size;
}

std::vector<Sample> ContractRegistry::effective_samples(const ModelContract& contract)
{
    std::vector<Sample> samples;
    for (const ContributionRecord& record : contract.contributions) {
        const DataRef* effective = &record.data;
        if (record.status == ContributionStatus::Forfeited) {
            const Challenge* accepted = record.accepted_challenge();
            if (accepted != nullptr) {
                effective = &accepted->correction;
            }
        }
        if (const auto* s = std::get_if<Sample>(effective)) {
            samples.push_back(*s);
        }
    }
    return samples;
}

std::string ContractRegistry::replay_model(const ModelContract& contract)
{
    OnlineModel model = deserialize_model(contract.initial_model_bytes);
    std::vector<Sample> samples = effective_samples(contract);
    return serialize_model(fold(std::move(model), samples));
}

std::string ContractRegistry::snapshot_dataset(const Address& id) const
{
    const ModelContract& contract = at(id);
    std::string out;
    if (store_ != nullptr && store_->has(contract.initial_data_hash)) {
        out = store_->get_text(contract.initial_data_hash);
    }
    std::vector<Sample> samples = effective_samples(contract);
    out += encode_dataset(samples);
    return out;
}

void ContractRegistry::encode_state(std::string& out) const
{
    out += "contracts " + std::to_string(contracts_.size()) + "\n";
    for (const auto& [id, c] : contracts_) {
        out += "contract " + id.hex() + " owner " + c.owner.hex() + " dim " +
               std::to_string(c.feature_dim) + " classes ";
        for (std::size_t i = 0; i < c.class_set.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += std::to_string(c.class_set[i]);
        }
        out += " datahash " + c.initial_data_hash.hex() + " count " +
               std::to_string(c.initial_count) + " testdigest " + c.test_digest.hex() +
               " deposit " + std::to_string(c.params.deposit) + " reward " +
               std::to_string(c.params.reward) + " timeout " +
               std::to_string(c.params.timeout_blocks) + " pool " +
               std::to_string(c.reward_pool) + " predecessor " +
               (c.predecessor ? c.predecessor->hex() : std::string("-")) + "\n";
        out += "model " + bytes_hex(c.model_bytes) + "\n";
        out += "initialmodel " + bytes_hex(c.initial_model_bytes) + "\n";
        out += "contribs " + std::to_string(c.contributions.size()) + "\n";
        for (const ContributionRecord& r : c.contributions) {
            out += "contrib " + std::to_string(r.id) + " " + r.contributor.hex() + " " +
                   to_string(r.status) + " " + std::to_string(r.deposit_held) + " " +
                   std::to_string(r.submitted_at) + " " + (r.count_unverified ? "1" : "0") +
                   " " + encode_data_ref_state(r.data) + "\n";
            for (const Challenge& ch : r.challenges) {
                const char* outcome = ch.outcome == ChallengeOutcome::Open ? "open"
                                      : ch.outcome == ChallengeOutcome::Accepted ? "accepted"
                                                                                 : "rejected";
                out += "challenge " + ch.verifier.hex() + " " + outcome + " " +
                       std::to_string(ch.deposit_held) + " " +
                       encode_data_ref_state(ch.correction) + "\n";
            }
        }
    }
}

double evaluate_contract(const ModelContract& contract, const std::string& test_payload)
{
    if (digest(test_payload) != contract.test_digest) {
        throw ContractError("DigestMismatch");
    }
    std::vector<Sample> samples;
    try {
        samples = decode_dataset(test_payload);
    } catch (const ModelError&) {
        throw ContractError("DecodeFailure");
    }
    if (samples.empty()) {
        throw ContractError("DecodeFailure");
    }
    for (const Sample& s : samples) {
        if (s.features.size() != contract.feature_dim) {
            throw ContractError("DecodeFailure");
        }
    }
    OnlineModel model = deserialize_model(contract.model_bytes);
    return evaluate(model, samples);
}

} // namespace market
