#pragma once

#include <random>

#include "market/chain.hpp"

namespace market {

enum class AgentRole { Owner, GoodContributor, MaliciousContributor, Verifier };

struct AgentSpec {
    std::string name;
    AgentRole role = AgentRole::GoodContributor;
    Currency initial_balance = 10 * kCoin;
    double contribution_rate = 0.0; // contributions per block
    double flip_prob = 0.0;         // label flip probability (malicious: 1.0)
    double coverage = 0.0;          // verifier inspection probability q

    Address address() const { return Address::from_name(name); }
};

struct DataSpec {
    int dim = 4;
    int classes = 2;
    double margin = 2.0; // distance between class means
    int train_size = 1000;
    int test_size = 200;
    double initial_fraction = 0.8; // share of train folded into the deploy model
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::uint64_t blocks = 100;
    std::uint64_t blocktime = 15;
    IncentiveParams params{1 * kCoin, kCoin / 2, 10};
    DataSpec data;
    std::string model_kind = "logistic";
    double learning_rate = 0.05;
    Currency pool_funding = 50 * kCoin;
    std::vector<AgentSpec> agents;

    const AgentSpec* owner() const;
    void validate() const; // throws std::invalid_argument
};

struct GeneratedData {
    std::vector<Sample> train;
    std::vector<Sample> test;
    std::vector<Eigen::VectorXd> class_means;

    // Ground-truth labeler: nearest class mean.
    int true_label(const Eigen::VectorXd& features) const;
};

GeneratedData generate_data(const DataSpec& spec, std::uint64_t seed);

struct MetricsRow {
    std::uint64_t height = 0;
    std::vector<Currency> balances; // one per agent, config order
    std::uint64_t dataset_size = 0;
    double accuracy = 0.0;
    std::uint64_t pending = 0;
    std::uint64_t refunded = 0;
    std::uint64_t forfeited = 0;
    std::uint64_t rejected = 0; // rejected challenges
};

struct MetricsSeries {
    std::vector<std::string> agent_names;
    std::vector<Address> agent_addresses;
    std::vector<MetricsRow> rows; // one per sealed block
};

struct ScenarioResult {
    MetricsSeries metrics;
    std::vector<ContractEvent> events;
    Address contract;
    double initial_accuracy = 0.0;
    double final_accuracy = 0.0;
    std::uint64_t initial_size = 0;
    std::uint64_t final_size = 0;
    std::string journal;
};

// Run one scenario end to end: deploy, per-block agent actions, metrics per
// sealed block. Fully deterministic per config.
ScenarioResult run_scenario(const ScenarioConfig& config);

// Write balances.csv, dataset_growth.csv, accuracy.csv, events.csv.
void export_metrics(const ScenarioResult& result, const std::filesystem::path& directory);

// Flat "section.key = value" scenario files, '#' comments. Unknown keys are
// an error; see docs for the full key list.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& file);

} // namespace market
