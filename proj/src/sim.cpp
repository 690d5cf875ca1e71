#include "market/sim.hpp"

#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace market {
namespace {

Eigen::VectorXd class_mean(const DataSpec& spec, int label)
{
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(spec.dim);
    mean[0] = (label == 0 ? -0.5 : 0.5) * spec.margin;
    return mean;
}

Sample draw_sample(std::mt19937_64& rng, std::normal_distribution<double>& noise,
                   const DataSpec& spec)
{
    int label = int(rng() & 1);
    Sample s;
    s.label = label;
    s.features = class_mean(spec, label);
    for (int i = 0; i < spec.dim; ++i) {
        s.features[i] += noise(rng);
    }
    return s;
}

} // namespace

const AgentSpec* ScenarioConfig::owner() const
{
    for (const AgentSpec& agent : agents) {
        if (agent.role == AgentRole::Owner) {
            return &agent;
        }
    }
    return nullptr;
}

void ScenarioConfig::validate() const
{
    if (data.train_size < 1 || data.test_size < 1) {
        throw std::invalid_argument("train/test sizes must be >= 1");
    }
    if (data.classes != 2) {
        throw std::invalid_argument("only binary classification is supported");
    }
    if (data.dim < 1) {
        throw std::invalid_argument("feature dimension must be >= 1");
    }
    if (data.initial_fraction < 0.0 || data.initial_fraction > 1.0) {
        throw std::invalid_argument("initial_fraction must be in [0,1]");
    }
    if (owner() == nullptr) {
        throw std::invalid_argument("scenario needs an owner agent");
    }
    if (!params.valid()) {
        throw std::invalid_argument("invalid incentive params");
    }
    for (const AgentSpec& agent : agents) {
        if (agent.contribution_rate < 0.0) {
            throw std::invalid_argument("contribution rate must be >= 0");
        }
        if (agent.flip_prob < 0.0 || agent.flip_prob > 1.0 || agent.coverage < 0.0 ||
            agent.coverage > 1.0) {
            throw std::invalid_argument("probabilities must be in [0,1]");
        }
        if (agent.initial_balance < 0) {
            throw std::invalid_argument("initial balance must be >= 0");
        }
    }
}

int GeneratedData::true_label(const Eigen::VectorXd& features) const
{
    int best = 0;
    double best_dist = (features - class_means[0]).squaredNorm();
    for (std::size_t c = 1; c < class_means.size(); ++c) {
        double d = (features - class_means[c]).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = int(c);
        }
    }
    return best;
}

GeneratedData generate_data(const DataSpec& spec, std::uint64_t seed)
{
    if (spec.train_size < 1 || spec.test_size < 1 || spec.dim < 1 || spec.classes != 2) {
        throw std::invalid_argument("invalid data spec");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    GeneratedData data;
    data.class_means = {class_mean(spec, 0), class_mean(spec, 1)};
    data.train.reserve(std::size_t(spec.train_size));
    data.test.reserve(std::size_t(spec.test_size));
    for (int i = 0; i < spec.train_size; ++i) {
        data.train.push_back(draw_sample(rng, noise, spec));
    }
    for (int i = 0; i < spec.test_size; ++i) {
        data.test.push_back(draw_sample(rng, noise, spec));
    }
    return data;
}

ScenarioResult run_scenario(const ScenarioConfig& config)
{
    config.validate();

    GeneratedData data = generate_data(config.data, config.seed);
    std::mt19937_64 rng(config.seed ^ 0xda7a5eed2026ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    MemoryBlobStore store;
    std::vector<std::pair<Address, Currency>> genesis_accounts;
    for (const AgentSpec& agent : config.agents) {
        genesis_accounts.emplace_back(agent.address(), agent.initial_balance);
    }
    Chain chain(genesis_accounts, config.blocktime, &store);

    const AgentSpec& owner = *config.owner();
    const Address owner_addr = owner.address();

    // Initial model: one pass over the configured fraction of train data.
    std::size_t initial_n =
        std::size_t(config.data.initial_fraction * double(config.data.train_size) + 0.5);
    std::span<const Sample> initial_span(data.train.data(), initial_n);
    OnlineModel initial_model =
        fold(make_model(config.model_kind, config.data.dim, config.learning_rate), initial_span);

    std::string initial_payload = encode_dataset(initial_span);
    ContentHash initial_hash = store.put(initial_payload);
    std::string test_payload = encode_dataset(data.test);
    ContentHash test_digest = digest(test_payload);

    ScenarioResult result;
    result.initial_accuracy = data.test.empty() ? 0.0 : evaluate(initial_model, data.test);
    result.initial_size = initial_n;

    // Last height at which new contributions still settle inside the run.
    std::uint64_t contribute_until =
        config.blocks > config.params.timeout_blocks + 2
            ? config.blocks - config.params.timeout_blocks - 2
            : 0;

    Address contract_addr;
    std::map<std::uint64_t, int> true_labels;        // contribution id -> truth
    std::deque<int> submitted_truth;                 // fifo, aligned with ADD events
    std::map<std::uint64_t, std::set<std::size_t>> inspected; // id -> verifier indices
    std::set<std::uint64_t> claim_submitted;
    std::size_t events_seen = 0;

    result.metrics.agent_names.reserve(config.agents.size());
    for (const AgentSpec& agent : config.agents) {
        result.metrics.agent_names.push_back(agent.name);
        result.metrics.agent_addresses.push_back(agent.address());
    }

    for (std::uint64_t height = 1; height <= config.blocks; ++height) {
        std::map<Address, Currency> queued_spend;
        auto can_afford = [&](const Address& addr, Currency amount) {
            return chain.ledger().balance_of(addr) - queued_spend[addr] >= amount;
        };

        if (height == 1) {
            contract_addr = chain.next_contract_address(owner_addr);
            result.contract = contract_addr;
            DeployPayload deploy;
            deploy.model_bytes = serialize_model(initial_model);
            deploy.feature_dim = config.data.dim;
            deploy.class_set = {0, 1};
            deploy.initial_data_hash = initial_hash;
            deploy.initial_count = initial_n;
            deploy.test_digest = test_digest;
            deploy.params = config.params;
            chain.submit(owner_addr, config.pool_funding, std::move(deploy));
            queued_spend[owner_addr] += config.pool_funding;
        }

        const ModelContract* contract = chain.registry().find(contract_addr);
        if (contract != nullptr) {
            // Contributions.
            for (const AgentSpec& agent : config.agents) {
                if (agent.role != AgentRole::GoodContributor &&
                    agent.role != AgentRole::MaliciousContributor) {
                    continue;
                }
                if (height > contribute_until) {
                    continue;
                }
                if (unit(rng) >= agent.contribution_rate) {
                    continue;
                }
                // An agent that cannot afford the deposit skips its turn.
                if (!can_afford(agent.address(), config.params.deposit)) {
                    continue;
                }
                Sample sample = draw_sample(rng, noise, config.data);
                int truth = sample.label;
                if (unit(rng) < agent.flip_prob) {
                    sample.label = 1 - sample.label;
                }
                chain.submit(agent.address(), config.params.deposit,
                             AddDataPayload{contract_addr, sample});
                queued_spend[agent.address()] += config.params.deposit;
                submitted_truth.push_back(truth);
            }

            // Verification: each verifier rolls once per pending contribution.
            std::set<std::uint64_t> challenged_now;
            for (std::size_t ai = 0; ai < config.agents.size(); ++ai) {
                const AgentSpec& agent = config.agents[ai];
                if (agent.role != AgentRole::Verifier) {
                    continue;
                }
                for (const ContributionRecord& record : contract->contributions) {
                    if (record.status != ContributionStatus::Pending) {
                        continue;
                    }
                    const auto* sample = std::get_if<Sample>(&record.data);
                    if (sample == nullptr) {
                        continue;
                    }
                    if (inspected[record.id].contains(ai) || challenged_now.contains(record.id)) {
                        continue;
                    }
                    inspected[record.id].insert(ai);
                    if (unit(rng) >= agent.coverage) {
                        continue;
                    }
                    int truth = true_labels.at(record.id);
                    if (sample->label == truth) {
                        continue;
                    }
                    if (height >= record.submitted_at + config.params.timeout_blocks) {
                        continue;
                    }
                    if (!can_afford(agent.address(), config.params.deposit)) {
                        continue;
                    }
                    Sample correction = *sample;
                    correction.label = truth;
                    chain.submit(agent.address(), config.params.deposit,
                                 VerifyPayload{contract_addr, record.id, correction});
                    queued_spend[agent.address()] += config.params.deposit;
                    challenged_now.insert(record.id);
                }
            }

            // Owner adjudication with ground truth.
            for (const ContributionRecord& record : contract->contributions) {
                if (record.status != ContributionStatus::Challenged) {
                    continue;
                }
                const Challenge* challenge = record.open_challenge();
                const auto* original = std::get_if<Sample>(&record.data);
                const auto* corrected = std::get_if<Sample>(&challenge->correction);
                int truth = true_labels.at(record.id);
                bool accept = original != nullptr && corrected != nullptr &&
                              original->label != truth && corrected->label == truth;
                chain.submit(owner_addr, 0,
                             AdjudicatePayload{contract_addr, record.id, accept});
            }

            // Refund claims at or past the timeout boundary.
            for (const ContributionRecord& record : contract->contributions) {
                if (record.status != ContributionStatus::Pending ||
                    claim_submitted.contains(record.id)) {
                    continue;
                }
                if (height < record.submitted_at + config.params.timeout_blocks) {
                    continue;
                }
                chain.submit(record.contributor, 0,
                             ClaimRefundPayload{contract_addr, record.id});
                claim_submitted.insert(record.id);
            }
        }

        chain.seal();

        // Map the block's ADD events back to the submitted ground truth.
        const auto& all_events = chain.registry().events();
        for (; events_seen < all_events.size(); ++events_seen) {
            const ContractEvent& event = all_events[events_seen];
            if (event.kind == ContractEventKind::Add) {
                if (submitted_truth.empty()) {
                    throw std::logic_error("truth fifo out of sync");
                }
                true_labels[*event.contribution_id] = submitted_truth.front();
                submitted_truth.pop_front();
            }
        }
        if (!submitted_truth.empty()) {
            throw std::logic_error("contribution submission was rejected unexpectedly");
        }

        // Metrics row for this sealed block.
        MetricsRow row;
        row.height = height;
        for (const AgentSpec& agent : config.agents) {
            row.balances.push_back(chain.ledger().balance_of(agent.address()));
        }
        const ModelContract* sealed = chain.registry().find(contract_addr);
        if (sealed != nullptr) {
            row.dataset_size = ContractRegistry::dataset_size(*sealed);
            row.accuracy = evaluate_contract(*sealed, test_payload);
            for (const ContributionRecord& record : sealed->contributions) {
                switch (record.status) {
                case ContributionStatus::Pending: ++row.pending; break;
                case ContributionStatus::Refunded: ++row.refunded; break;
                case ContributionStatus::Forfeited: ++row.forfeited; break;
                case ContributionStatus::Challenged: break;
                }
                for (const Challenge& c : record.challenges) {
                    if (c.outcome == ChallengeOutcome::Rejected) {
                        ++row.rejected;
                    }
                }
            }
        }
        result.metrics.rows.push_back(std::move(row));
    }

    const ModelContract& final_contract = chain.registry().at(contract_addr);
    result.final_accuracy = evaluate_contract(final_contract, test_payload);
    result.final_size = ContractRegistry::dataset_size(final_contract);
    result.events = chain.registry().events();
    result.journal = chain.journal();
    return result;
}

void export_metrics(const ScenarioResult& result, const std::filesystem::path& directory)
{
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    auto open = [&](const char* name) {
        std::ofstream out(directory / name, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(std::string("cannot write ") + name);
        }
        return out;
    };

    {
        std::ofstream out = open("balances.csv");
        out << "height";
        for (const Address& addr : result.metrics.agent_addresses) {
            out << "," << addr.hex();
        }
        out << "\n";
        for (const MetricsRow& row : result.metrics.rows) {
            out << row.height;
            for (Currency balance : row.balances) {
                out << "," << balance;
            }
            out << "\n";
        }
    }
    {
        std::ofstream out = open("dataset_growth.csv");
        out << "height,size\n";
        for (const MetricsRow& row : result.metrics.rows) {
            out << row.height << "," << row.dataset_size << "\n";
        }
    }
    {
        std::ofstream out = open("accuracy.csv");
        out << "height,accuracy\n";
        for (const MetricsRow& row : result.metrics.rows) {
            out << row.height << "," << format_double(row.accuracy) << "\n";
        }
    }
    {
        std::ofstream out = open("events.csv");
        out << "height,contract,event,contribution_id,amount\n";
        for (const ContractEvent& event : result.events) {
            out << to_csv_row(event) << "\n";
        }
    }
}

namespace {

struct KeyValue {
    std::string key;
    std::string value;
    int line_no;
};

std::string trim(const std::string& s)
{
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_key(const KeyValue& kv, const std::string& why)
{
    throw std::invalid_argument("scenario line " + std::to_string(kv.line_no) + ", key '" +
                                kv.key + "': " + why);
}

Currency coins_or_die(const KeyValue& kv)
{
    auto c = parse_coins(kv.value);
    if (!c) {
        bad_key(kv, "expected a coin amount");
    }
    return *c;
}

double double_or_die(const KeyValue& kv)
{
    try {
        return parse_double(kv.value);
    } catch (const ModelError&) {
        bad_key(kv, "expected a number");
    }
}

std::uint64_t u64_or_die(const KeyValue& kv)
{
    try {
        return std::stoull(kv.value);
    } catch (const std::exception&) {
        bad_key(kv, "expected an integer");
    }
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text)
{
    ScenarioConfig config;
    config.agents.clear();
    std::map<std::string, std::size_t> agent_index;

    auto agent_ref = [&](const std::string& name) -> AgentSpec& {
        auto [it, inserted] = agent_index.try_emplace(name, config.agents.size());
        if (inserted) {
            AgentSpec spec;
            spec.name = name;
            config.agents.push_back(std::move(spec));
        }
        return config.agents[it->second];
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("scenario line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (kv.key.empty() || kv.value.empty()) {
            throw std::invalid_argument("scenario line " + std::to_string(line_no) +
                                        ": empty key or value");
        }

        if (kv.key == "scenario.seed") {
            config.seed = u64_or_die(kv);
        } else if (kv.key == "scenario.blocks") {
            config.blocks = u64_or_die(kv);
        } else if (kv.key == "scenario.blocktime") {
            config.blocktime = u64_or_die(kv);
        } else if (kv.key == "incentive.deposit") {
            config.params.deposit = coins_or_die(kv);
        } else if (kv.key == "incentive.reward") {
            config.params.reward = coins_or_die(kv);
        } else if (kv.key == "incentive.timeout") {
            config.params.timeout_blocks = u64_or_die(kv);
        } else if (kv.key == "data.dim") {
            config.data.dim = int(u64_or_die(kv));
        } else if (kv.key == "data.classes") {
            config.data.classes = int(u64_or_die(kv));
        } else if (kv.key == "data.margin") {
            config.data.margin = double_or_die(kv);
        } else if (kv.key == "data.train_size") {
            config.data.train_size = int(u64_or_die(kv));
        } else if (kv.key == "data.test_size") {
            config.data.test_size = int(u64_or_die(kv));
        } else if (kv.key == "data.initial_fraction") {
            config.data.initial_fraction = double_or_die(kv);
        } else if (kv.key == "model.kind") {
            config.model_kind = kv.value;
        } else if (kv.key == "model.learning_rate") {
            config.learning_rate = double_or_die(kv);
        } else if (kv.key == "owner.pool_funding") {
            config.pool_funding = coins_or_die(kv);
        } else if (kv.key.starts_with("agent.")) {
            std::size_t dot = kv.key.find('.', 6);
            if (dot == std::string::npos) {
                bad_key(kv, "expected agent.<name>.<field>");
            }
            std::string name = kv.key.substr(6, dot - 6);
            std::string field = kv.key.substr(dot + 1);
            AgentSpec& agent = agent_ref(name);
            if (field == "role") {
                if (kv.value == "owner") {
                    agent.role = AgentRole::Owner;
                } else if (kv.value == "good") {
                    agent.role = AgentRole::GoodContributor;
                } else if (kv.value == "malicious") {
                    agent.role = AgentRole::MaliciousContributor;
                    if (agent.flip_prob == 0.0) {
                        agent.flip_prob = 1.0;
                    }
                } else if (kv.value == "verifier") {
                    agent.role = AgentRole::Verifier;
                } else {
                    bad_key(kv, "unknown role '" + kv.value + "'");
                }
            } else if (field == "balance") {
                agent.initial_balance = coins_or_die(kv);
            } else if (field == "rate") {
                agent.contribution_rate = double_or_die(kv);
            } else if (field == "flip_prob") {
                agent.flip_prob = double_or_die(kv);
            } else if (field == "coverage") {
                agent.coverage = double_or_die(kv);
            } else {
                bad_key(kv, "unknown agent field '" + field + "'");
            }
        } else {
            bad_key(kv, "unknown key");
        }
    }
    config.validate();
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read scenario file " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace market
