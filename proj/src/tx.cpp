#include "market/tx.hpp"

#include <sstream>
#include <stdexcept>

namespace market {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

std::string to_hex(const std::string& bytes)
{
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out += kHexDigits[c >> 4];
        out += kHexDigits[c & 0xf];
    }
    return out;
}

std::string from_hex(const std::string& hex)
{
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument("odd hex length");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out += char(nibble(hex[i]) << 4 | nibble(hex[i + 1]));
    }
    return out;
}

class TokenReader {
public:
    explicit TokenReader(const std::string& line) : in_(line) {}

    std::string next()
    {
        std::string tok;
        if (!(in_ >> tok)) {
            throw std::invalid_argument("truncated transaction encoding");
        }
        return tok;
    }

    std::uint64_t next_u64() { return std::stoull(next()); }
    std::int64_t next_i64() { return std::stoll(next()); }

    Address next_address()
    {
        auto a = Address::from_hex(next());
        if (!a) {
            throw std::invalid_argument("bad address");
        }
        return *a;
    }

    ContentHash next_hash()
    {
        auto h = ContentHash::from_hex(next());
        if (!h) {
            throw std::invalid_argument("bad content hash");
        }
        return *h;
    }

    bool done()
    {
        return !(in_ >> std::ws) || in_.eof();
    }

private:
    std::istringstream in_;
};

std::string encode_data_ref(const DataRef& ref)
{
    if (const auto* s = std::get_if<Sample>(&ref)) {
        std::string out = "inline " + std::to_string(s->label) + " ";
        for (Eigen::Index i = 0; i < s->features.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += format_double(s->features[i]);
        }
        return out;
    }
    const auto& d = std::get<DatasetHashRef>(ref);
    return "hash " + d.hash.hex() + " " + std::to_string(d.declared_count);
}

DataRef parse_data_ref(TokenReader& r)
{
    std::string tag = r.next();
    if (tag == "inline") {
        Sample s;
        s.label = int(r.next_i64());
        std::string feats = r.next();
        std::vector<double> vals;
        std::size_t start = 0;
        while (start <= feats.size()) {
            std::size_t pos = feats.find(',', start);
            std::string tok = feats.substr(start, pos == std::string::npos ? pos : pos - start);
            vals.push_back(parse_double(tok));
            if (pos == std::string::npos) {
                break;
            }
            start = pos + 1;
        }
        s.features.resize(Eigen::Index(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) {
            s.features[Eigen::Index(i)] = vals[i];
        }
        return s;
    }
    if (tag == "hash") {
        DatasetHashRef d;
        d.hash = r.next_hash();
        d.declared_count = r.next_u64();
        return d;
    }
    throw std::invalid_argument("bad data ref tag: " + tag);
}

std::string encode_params(const IncentiveParams& p)
{
    return std::to_string(p.deposit) + " " + std::to_string(p.reward) + " " +
           std::to_string(p.timeout_blocks);
}

IncentiveParams parse_params(TokenReader& r)
{
    IncentiveParams p;
    p.deposit = r.next_i64();
    p.reward = r.next_i64();
    p.timeout_blocks = r.next_u64();
    return p;
}

std::string encode_classes(const std::vector<int>& classes)
{
    std::string out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(classes[i]);
    }
    return out;
}

std::vector<int> parse_classes(const std::string& text)
{
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find(',', start);
        out.push_back(std::stoi(text.substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

} // namespace

bool data_ref_equal(const DataRef& a, const DataRef& b)
{
    if (a.index() != b.index()) {
        return false;
    }
    if (const auto* sa = std::get_if<Sample>(&a)) {
        const auto& sb = std::get<Sample>(b);
        return sa->label == sb.label && sa->features.size() == sb.features.size() &&
               sa->features == sb.features;
    }
    return std::get<DatasetHashRef>(a) == std::get<DatasetHashRef>(b);
}

const char* to_string(ContributionStatus status)
{
    switch (status) {
    case ContributionStatus::Pending: return "pending";
    case ContributionStatus::Challenged: return "challenged";
    case ContributionStatus::Refunded: return "refunded";
    case ContributionStatus::Forfeited: return "forfeited";
    }
    return "?";
}

const char* to_string(TxKind kind)
{
    switch (kind) {
    case TxKind::Transfer: return "Transfer";
    case TxKind::DeployContract: return "DeployContract";
    case TxKind::AddData: return "AddData";
    case TxKind::AddDatasetHash: return "AddDatasetHash";
    case TxKind::Verify: return "Verify";
    case TxKind::Adjudicate: return "Adjudicate";
    case TxKind::ClaimRefund: return "ClaimRefund";
    case TxKind::UpdateModel: return "UpdateModel";
    }
    return "?";
}

TxKind Transaction::kind() const
{
    struct Visitor {
        TxKind operator()(const TransferPayload&) const { return TxKind::Transfer; }
        TxKind operator()(const DeployPayload&) const { return TxKind::DeployContract; }
        TxKind operator()(const AddDataPayload& p) const
        {
            return std::holds_alternative<Sample>(p.data) ? TxKind::AddData
                                                          : TxKind::AddDatasetHash;
        }
        TxKind operator()(const VerifyPayload&) const { return TxKind::Verify; }
        TxKind operator()(const AdjudicatePayload&) const { return TxKind::Adjudicate; }
        TxKind operator()(const ClaimRefundPayload&) const { return TxKind::ClaimRefund; }
        TxKind operator()(const UpdateModelPayload&) const { return TxKind::UpdateModel; }
    };
    return std::visit(Visitor{}, payload);
}

std::string encode_tx(const Transaction& tx)
{
    std::string head =
        tx.sender.hex() + " " + std::to_string(tx.nonce) + " " + std::to_string(tx.value) + " ";
    struct Visitor {
        std::string operator()(const TransferPayload& p) const
        {
            return "transfer " + p.to.hex();
        }
        std::string operator()(const DeployPayload& p) const
        {
            return "deploy " + to_hex(p.model_bytes) + " " + std::to_string(p.feature_dim) + " " +
                   encode_classes(p.class_set) + " " + p.initial_data_hash.hex() + " " +
                   std::to_string(p.initial_count) + " " + p.test_digest.hex() + " " +
                   encode_params(p.params);
        }
        std::string operator()(const AddDataPayload& p) const
        {
            return "adddata " + p.contract.hex() + " " + encode_data_ref(p.data);
        }
        std::string operator()(const VerifyPayload& p) const
        {
            return "verify " + p.contract.hex() + " " + std::to_string(p.contribution_id) + " " +
                   encode_data_ref(p.correction);
        }
        std::string operator()(const AdjudicatePayload& p) const
        {
            return "adjudicate " + p.contract.hex() + " " + std::to_string(p.contribution_id) +
                   (p.accept ? " accept" : " reject");
        }
        std::string operator()(const ClaimRefundPayload& p) const
        {
            return "claim " + p.contract.hex() + " " + std::to_string(p.contribution_id);
        }
        std::string operator()(const UpdateModelPayload& p) const
        {
            return "update " + p.predecessor.hex() + " " + to_hex(p.model_bytes) + " " +
                   p.initial_data_hash.hex() + " " + std::to_string(p.initial_count) + " " +
                   p.test_digest.hex() + " " + encode_params(p.params);
        }
    };
    return head + std::visit(Visitor{}, tx.payload);
}

Transaction parse_tx(const std::string& line)
{
    TokenReader r(line);
    Transaction tx;
    tx.sender = r.next_address();
    tx.nonce = r.next_u64();
    tx.value = r.next_i64();
    std::string kind = r.next();
    if (kind == "transfer") {
        tx.payload = TransferPayload{r.next_address()};
    } else if (kind == "deploy") {
        DeployPayload p;
        p.model_bytes = from_hex(r.next());
        p.feature_dim = int(r.next_i64());
        p.class_set = parse_classes(r.next());
        p.initial_data_hash = r.next_hash();
        p.initial_count = r.next_u64();
        p.test_digest = r.next_hash();
        p.params = parse_params(r);
        tx.payload = std::move(p);
    } else if (kind == "adddata") {
        AddDataPayload p;
        p.contract = r.next_address();
        p.data = parse_data_ref(r);
        tx.payload = std::move(p);
    } else if (kind == "verify") {
        VerifyPayload p;
        p.contract = r.next_address();
        p.contribution_id = r.next_u64();
        p.correction = parse_data_ref(r);
        tx.payload = std::move(p);
    } else if (kind == "adjudicate") {
        AdjudicatePayload p;
        p.contract = r.next_address();
        p.contribution_id = r.next_u64();
        std::string verdict = r.next();
        if (verdict != "accept" && verdict != "reject") {
            throw std::invalid_argument("bad verdict: " + verdict);
        }
        p.accept = verdict == "accept";
        tx.payload = p;
    } else if (kind == "claim") {
        ClaimRefundPayload p;
        p.contract = r.next_address();
        p.contribution_id = r.next_u64();
        tx.payload = p;
    } else if (kind == "update") {
        UpdateModelPayload p;
        p.predecessor = r.next_address();
        p.model_bytes = from_hex(r.next());
        p.initial_data_hash = r.next_hash();
        p.initial_count = r.next_u64();
        p.test_digest = r.next_hash();
        p.params = parse_params(r);
        tx.payload = std::move(p);
    } else {
        throw std::invalid_argument("unknown transaction kind: " + kind);
    }
    return tx;
}

std::string encode_block(const Block& block)
{
    std::string out = "block v1\n";
    out += "height " + std::to_string(block.height) + "\n";
    out += "timestamp " + std::to_string(block.timestamp) + "\n";
    out += "parent " + block.parent_digest.hex() + "\n";
    out += "state " + block.state_digest.hex() + "\n";
    out += "txs " + std::to_string(block.transactions.size()) + "\n";
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const TxReceipt& rc = block.receipts[i];
        out += "tx " + encode_tx(block.transactions[i]) + "\n";
        out += "rc " + std::string(rc.status == TxStatus::Applied ? "applied" : "rejected");
        if (!rc.reason.empty()) {
            out += " " + rc.reason;
        }
        out += "\n";
    }
    return out;
}

Block parse_block(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    auto expect_line = [&](const std::string& prefix) {
        if (!std::getline(in, line) || !line.starts_with(prefix)) {
            throw std::invalid_argument("malformed block encoding at '" + prefix + "'");
        }
        return line.substr(prefix.size());
    };
    if (expect_line("block ") != "v1") {
        throw std::invalid_argument("unsupported block format");
    }
    Block b;
    b.height = std::stoull(expect_line("height "));
    b.timestamp = std::stoull(expect_line("timestamp "));
    b.parent_digest = ContentHash::from_hex(expect_line("parent ")).value();
    b.state_digest = ContentHash::from_hex(expect_line("state ")).value();
    std::size_t n = std::stoull(expect_line("txs "));
    for (std::size_t i = 0; i < n; ++i) {
        b.transactions.push_back(parse_tx(expect_line("tx ")));
        std::string rc = expect_line("rc ");
        TxReceipt receipt;
        if (rc.starts_with("applied")) {
            receipt.status = TxStatus::Applied;
        } else if (rc.starts_with("rejected")) {
            receipt.status = TxStatus::Rejected;
            if (rc.size() > 9) {
                receipt.reason = rc.substr(9);
            }
        } else {
            throw std::invalid_argument("malformed receipt: " + rc);
        }
        b.receipts.push_back(std::move(receipt));
    }
    return b;
}

} // namespace market
