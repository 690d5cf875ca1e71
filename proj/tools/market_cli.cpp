// Command-line front end: scenario runs, step-by-step contract operation
// against a persisted workspace, file hashing, and plot-ready exports.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "market/sim.hpp"

using namespace market;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitProtocol = 2;

std::string slurp_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

Address parse_address(const std::string& text)
{
    if (auto a = Address::from_hex(text)) {
        return *a;
    }
    return Address::from_name(text);
}

Currency coins_arg(const std::string& text, const std::string& what)
{
    auto c = parse_coins(text);
    if (!c) {
        throw CLI::ValidationError(what, "expected a coin amount like 1 or 0.5");
    }
    return *c;
}

// Workspace: ledger.log journal + blobs/ + contracts/ + lock file.
struct Workspace {
    Workspace() = default;
    Workspace(Workspace&&) = default;
    Workspace& operator=(Workspace&&) = delete;

    std::filesystem::path dir;
    std::unique_ptr<DirBlobStore> store;
    std::unique_ptr<Chain> chain;

    std::filesystem::path journal_path() const { return dir / "ledger.log"; }
    std::filesystem::path lock_path() const { return dir / "lock"; }

    void lock()
    {
        std::ofstream out(lock_path(), std::ios::out | std::ios::app);
        // Advisory single-process lock: refuse when another run holds it.
        if (std::filesystem::exists(lock_path()) &&
            std::filesystem::file_size(lock_path()) > 0) {
            throw std::runtime_error("workspace is locked: " + lock_path().string());
        }
        out << ::getpid();
    }
    void unlock() { std::filesystem::remove(lock_path()); }

    static Workspace create(const std::filesystem::path& dir,
                            std::vector<std::pair<Address, Currency>> genesis,
                            std::uint64_t blocktime)
    {
        Workspace ws;
        ws.dir = dir;
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(ws.journal_path())) {
            throw std::runtime_error("workspace already initialized: " + dir.string());
        }
        ws.lock();
        ws.store = std::make_unique<DirBlobStore>(dir / "blobs");
        ws.chain = std::make_unique<Chain>(std::move(genesis), blocktime, ws.store.get());
        return ws;
    }

    static Workspace open(const std::filesystem::path& dir)
    {
        Workspace ws;
        ws.dir = dir;
        if (!std::filesystem::exists(ws.journal_path())) {
            throw std::runtime_error("not a workspace (missing ledger.log): " + dir.string());
        }
        ws.lock();
        ws.store = std::make_unique<DirBlobStore>(dir / "blobs");
        ws.chain = std::make_unique<Chain>(
            Chain::load_journal(slurp_file(ws.journal_path()), ws.store.get()));
        return ws;
    }

    void persist()
    {
        write_file(journal_path(), chain->journal());
        std::filesystem::create_directories(dir / "contracts");
        for (const auto& [id, contract] : chain->registry().contracts()) {
            std::string state;
            state += "contract " + id.hex() + "\n";
            state += "model:\n" + contract.model_bytes;
            state += "pool " + std::to_string(contract.reward_pool) + "\n";
            state += "contributions " + std::to_string(contract.contributions.size()) + "\n";
            write_file(dir / "contracts" / (id.hex() + ".txt"), state);
        }
    }

    ~Workspace()
    {
        if (store != nullptr) {
            unlock();
        }
    }
};

// Print the contract events emitted by the last sealed block.
void print_new_events(const ContractRegistry& registry, std::size_t before)
{
    const auto& events = registry.events();
    for (std::size_t i = before; i < events.size(); ++i) {
        std::cout << to_csv_row(events[i]) << "\n";
    }
}

int apply_or_fail(Workspace& ws, const Address& sender, Currency value, TxPayload payload)
{
    std::size_t events_before = ws.chain->registry().events().size();
    TxReceipt receipt = ws.chain->apply_one(sender, value, std::move(payload));
    if (receipt.status != TxStatus::Applied) {
        std::cerr << receipt.reason << "\n";
        return kExitProtocol;
    }
    ws.persist();
    print_new_events(ws.chain->registry(), events_before);
    return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir)
{
    ScenarioConfig config;
    try {
        config = load_scenario(scenario_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (seed) {
        config.seed = *seed;
    }
    ScenarioResult result = run_scenario(config);
    export_metrics(result, out_dir);

    Currency malicious_balance = -1;
    for (std::size_t i = 0; i < config.agents.size(); ++i) {
        if (config.agents[i].role == AgentRole::MaliciousContributor) {
            malicious_balance = result.metrics.rows.back().balances[i];
            break;
        }
    }
    std::cout << "final_accuracy=" << format_double(result.final_accuracy) << " dataset="
              << result.initial_size << "->" << result.final_size << " malicious_balance="
              << (malicious_balance >= 0 ? format_coins(malicious_balance) : "none") << "\n";
    return kExitOk;
}

int cmd_hash(const std::string& path)
{
    std::string content;
    try {
        content = slurp_file(path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitProtocol;
    }
    std::cout << digest(content).hex() << "\n";
    return kExitOk;
}

int cmd_report(const std::string& metrics_dir, const std::string& out_dir,
               std::uint64_t blocktime)
{
    namespace fs = std::filesystem;
    fs::path in(metrics_dir);
    for (const char* name : {"balances.csv", "dataset_growth.csv", "accuracy.csv",
                             "events.csv"}) {
        if (!fs::exists(in / name)) {
            std::cerr << "missing " << (in / name).string() << "\n";
            return kExitUsage;
        }
    }
    fs::create_directories(out_dir);
    fs::path out(out_dir);

    // Balances to long/tidy format for plotting.
    {
        std::ifstream bal(in / "balances.csv");
        std::ofstream fig(out / "fig_balances.csv", std::ios::trunc);
        std::string header;
        std::getline(bal, header);
        std::vector<std::string> cols;
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            cols.push_back(col);
        }
        fig << "height,agent,balance\n";
        std::string line;
        while (std::getline(bal, line)) {
            std::istringstream ls(line);
            std::string height;
            std::getline(ls, height, ',');
            for (std::size_t i = 1; i < cols.size(); ++i) {
                std::string value;
                std::getline(ls, value, ',');
                fig << height << "," << cols[i] << "," << value << "\n";
            }
        }
    }
    fs::copy_file(in / "dataset_growth.csv", out / "fig_dataset_growth.csv",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(in / "accuracy.csv", out / "fig_accuracy.csv",
                  fs::copy_options::overwrite_existing);

    // Simulated operation counts and simulated time (count x blocktime).
    std::map<std::string, std::uint64_t> counts;
    {
        std::ifstream events(in / "events.csv");
        std::string line;
        std::getline(events, line);
        while (std::getline(events, line)) {
            std::istringstream ls(line);
            std::string height, contract, kind;
            std::getline(ls, height, ',');
            std::getline(ls, contract, ',');
            std::getline(ls, kind, ',');
            counts[kind]++;
        }
    }
    std::ostringstream summary;
    summary << "operation,count,simulated_seconds\n";
    for (const auto& [kind, count] : counts) {
        summary << kind << "," << count << "," << count * blocktime << "\n";
    }
    write_file(out / "summary.txt", summary.str());
    std::cout << summary.str();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deterministic marketplace for collaborative online learning"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* simulate = app.add_subcommand("simulate", "run a scenario and export metric CSVs");
    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    simulate->add_option("--scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--seed", seed_override, "override the scenario seed");
    simulate->add_option("--out", out_dir, "output directory for CSVs");

    // --- hash ---
    auto* hash_cmd = app.add_subcommand("hash", "print the content hash of a file");
    std::string hash_path;
    hash_cmd->add_option("path", hash_path, "file to hash")->required();

    // --- contract ---
    auto* contract = app.add_subcommand("contract", "operate a contract in a workspace");
    contract->require_subcommand(1);
    std::string ws_dir;
    contract->add_option("--workspace", ws_dir, "workspace directory")->required();

    auto* deploy = contract->add_subcommand("deploy", "deploy a model contract");
    bool init = false;
    std::vector<std::string> genesis_args;
    std::uint64_t blocktime = 15;
    std::string from, model_kind = "perceptron", train_file, test_file;
    int dim = 2;
    double lr = 1.0;
    std::string deposit_s = "1", reward_s = "0.5", pool_s = "5";
    std::uint64_t timeout = 10;
    deploy->add_flag("--init", init, "create the workspace (required on first use)");
    deploy->add_option("--account", genesis_args,
                       "genesis account name=coins (repeatable, with --init)");
    deploy->add_option("--blocktime", blocktime, "simulated seconds per block (with --init)");
    deploy->add_option("--from", from, "owner account")->required();
    deploy->add_option("--model-kind", model_kind, "perceptron|logistic");
    deploy->add_option("--dim", dim, "feature dimension");
    deploy->add_option("--lr", lr, "learning rate");
    deploy->add_option("--train-file", train_file,
                       "initial training dataset (stored in blobs/, folded into the model)");
    deploy->add_option("--test-file", test_file, "hidden test dataset (only its digest is kept)")
        ->required();
    deploy->add_option("--deposit", deposit_s, "contribution deposit in coins");
    deploy->add_option("--reward", reward_s, "verification reward in coins");
    deploy->add_option("--timeout", timeout, "refund timeout in blocks");
    deploy->add_option("--pool", pool_s, "reward pool funding in coins");

    auto* add_data = contract->add_subcommand("add-data", "contribute a sample or dataset hash");
    std::string ad_from, ad_contract, ad_features, ad_hash, ad_file;
    int ad_label = 0;
    std::uint64_t ad_count = 1;
    add_data->add_option("--from", ad_from)->required();
    add_data->add_option("--contract", ad_contract)->required();
    add_data->add_option("--label", ad_label, "label for an inline sample");
    add_data->add_option("--features", ad_features, "comma-separated feature values");
    add_data->add_option("--data-hash", ad_hash, "dataset content hash (off-chain data)");
    add_data->add_option("--count", ad_count, "declared sample count for --data-hash/--file");
    add_data->add_option("--file", ad_file, "dataset file: stored in blobs/, added by hash");

    auto* verify = contract->add_subcommand("verify", "challenge a contribution");
    std::string v_from, v_contract, v_features;
    std::uint64_t v_id = 0;
    int v_label = 0;
    verify->add_option("--from", v_from)->required();
    verify->add_option("--contract", v_contract)->required();
    verify->add_option("--id", v_id, "contribution id")->required();
    verify->add_option("--label", v_label, "corrected label")->required();
    verify->add_option("--features", v_features, "corrected features")->required();

    auto* adjudicate = contract->add_subcommand("adjudicate", "owner decision on a challenge");
    std::string j_from, j_contract;
    std::uint64_t j_id = 0;
    bool j_accept = false, j_reject = false;
    adjudicate->add_option("--from", j_from)->required();
    adjudicate->add_option("--contract", j_contract)->required();
    adjudicate->add_option("--id", j_id)->required();
    adjudicate->add_flag("--accept", j_accept);
    adjudicate->add_flag("--reject", j_reject);

    auto* claim = contract->add_subcommand("claim-refund", "reclaim a deposit after timeout");
    std::string c_from, c_contract;
    std::uint64_t c_id = 0;
    claim->add_option("--from", c_from)->required();
    claim->add_option("--contract", c_contract)->required();
    claim->add_option("--id", c_id)->required();

    auto* evaluate_cmd = contract->add_subcommand("evaluate", "hidden-test accuracy");
    std::string e_contract, e_test_file;
    evaluate_cmd->add_option("--contract", e_contract)->required();
    evaluate_cmd->add_option("--test-file", e_test_file)->required();

    auto* lineage = contract->add_subcommand("lineage", "walk predecessor links");
    std::string l_contract;
    lineage->add_option("--contract", l_contract)->required();

    auto* advance = contract->add_subcommand("advance", "seal empty blocks");
    std::uint64_t adv_blocks = 1;
    advance->add_option("--blocks", adv_blocks, "number of empty blocks");

    // --- report ---
    auto* report = app.add_subcommand("report", "plot-ready CSVs and a summary table");
    std::string rep_metrics = "out", rep_out = "report";
    std::uint64_t rep_blocktime = 15;
    report->add_option("--metrics", rep_metrics, "directory with simulate output");
    report->add_option("--out", rep_out, "report output directory");
    report->add_option("--blocktime", rep_blocktime, "simulated seconds per block");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, seed_override, out_dir);
        }
        if (hash_cmd->parsed()) {
            return cmd_hash(hash_path);
        }
        if (report->parsed()) {
            return cmd_report(rep_metrics, rep_out, rep_blocktime);
        }

        // contract subcommands
        Workspace ws = [&] {
            if (deploy->parsed() && init) {
                std::vector<std::pair<Address, Currency>> genesis;
                for (const std::string& arg : genesis_args) {
                    std::size_t eq = arg.find('=');
                    if (eq == std::string::npos) {
                        throw CLI::ValidationError("--account", "expected name=coins");
                    }
                    genesis.emplace_back(parse_address(arg.substr(0, eq)),
                                         coins_arg(arg.substr(eq + 1), "--account"));
                }
                return Workspace::create(ws_dir, std::move(genesis), blocktime);
            }
            return Workspace::open(ws_dir);
        }();

        if (deploy->parsed()) {
            DeployPayload p;
            OnlineModel model = make_model(model_kind, dim, lr);
            p.initial_count = 0;
            if (!train_file.empty()) {
                std::string train_text = slurp_file(train_file);
                std::vector<Sample> train = decode_dataset(train_text);
                model = fold(std::move(model), train);
                p.initial_data_hash = ws.store->put(train_text);
                p.initial_count = train.size();
            }
            std::string test_text = slurp_file(test_file);
            p.test_digest = digest(test_text);
            p.model_bytes = serialize_model(model);
            p.feature_dim = dim;
            p.class_set = {0, 1};
            p.params = IncentiveParams{coins_arg(deposit_s, "--deposit"),
                                       coins_arg(reward_s, "--reward"), timeout};
            Address owner = parse_address(from);
            Address addr = ws.chain->next_contract_address(owner);
            int rc = apply_or_fail(ws, owner, coins_arg(pool_s, "--pool"), std::move(p));
            if (rc == kExitOk) {
                std::cout << "contract " << addr.hex() << "\n";
            }
            return rc;
        }
        if (add_data->parsed()) {
            DataRef data;
            if (!ad_file.empty()) {
                std::string text = slurp_file(ad_file);
                data = DatasetHashRef{ws.store->put(text), decode_dataset(text).size()};
            } else if (!ad_hash.empty()) {
                auto h = ContentHash::from_hex(ad_hash);
                if (!h) {
                    throw CLI::ValidationError("--data-hash", "expected 64 hex chars");
                }
                data = DatasetHashRef{*h, ad_count};
            } else {
                Sample s;
                s.label = ad_label;
                std::vector<Sample> one = decode_dataset(std::to_string(ad_label) + "," +
                                                         ad_features + "\n");
                data = one.at(0);
            }
            Address who = parse_address(ad_from);
            const ModelContract& c = ws.chain->registry().at(parse_address(ad_contract));
            return apply_or_fail(ws, who, c.params.deposit,
                                 AddDataPayload{c.id, std::move(data)});
        }
        if (verify->parsed()) {
            std::vector<Sample> one =
                decode_dataset(std::to_string(v_label) + "," + v_features + "\n");
            const ModelContract& c = ws.chain->registry().at(parse_address(v_contract));
            return apply_or_fail(ws, parse_address(v_from), c.params.deposit,
                                 VerifyPayload{c.id, v_id, one.at(0)});
        }
        if (adjudicate->parsed()) {
            if (j_accept == j_reject) {
                throw CLI::ValidationError("adjudicate", "pass exactly one of --accept/--reject");
            }
            return apply_or_fail(ws, parse_address(j_from), 0,
                                 AdjudicatePayload{parse_address(j_contract), j_id, j_accept});
        }
        if (claim->parsed()) {
            return apply_or_fail(ws, parse_address(c_from), 0,
                                 ClaimRefundPayload{parse_address(c_contract), c_id});
        }
        if (evaluate_cmd->parsed()) {
            const ModelContract& c = ws.chain->registry().at(parse_address(e_contract));
            double accuracy = evaluate_contract(c, slurp_file(e_test_file));
            std::cout << "accuracy=" << format_double(accuracy) << "\n";
            return kExitOk;
        }
        if (lineage->parsed()) {
            for (const Address& a : ws.chain->registry().lineage(parse_address(l_contract))) {
                std::cout << a.hex() << "\n";
            }
            return kExitOk;
        }
        if (advance->parsed()) {
            for (std::uint64_t i = 0; i < adv_blocks; ++i) {
                ws.chain->seal();
            }
            ws.persist();
            std::cout << "height=" << ws.chain->ledger().height() << "\n";
            return kExitOk;
        }
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const ContractError& e) {
        std::cerr << e.what() << "\n";
        return kExitProtocol;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitProtocol;
    }
}
