// End-to-end acceptance suite. Each numbered check prints one pass/fail
// line; the process exits nonzero if any check fails.
//
//  1. exact dataset growth 1000 -> 1100
//  2. hidden-test accuracy uplift, verified vs poisoned, 5 seeds
//  3. agent balance dynamics under full verification
//  4. currency conservation at every sealed block
//  5. escrow state-machine fuzzing (>= 10^4 sequences)
//  6. hash conformance (FIPS vectors, external oracle, mutation rejection)
//  7. replay equivalence + gradient conformance
//  8. byte-identical determinism of bundled scenarios
//  9. scripted CLI walkthroughs of the two protocol flows

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <openssl/sha.h>
#include <sys/wait.h>

#include "market/sim.hpp"

using namespace market;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail)
{
    std::cout << "[" << id << "] " << what << ": " << (pass ? "PASS" : "FAIL");
    if (!detail.empty()) {
        std::cout << " (" << detail << ")";
    }
    std::cout << "\n";
    if (!pass) {
        ++g_failures;
    }
}

std::string env_or_die(const char* name)
{
    const char* value = std::getenv(name);
    if (value == nullptr) {
        std::cerr << "missing environment variable " << name << "\n";
        std::exit(2);
    }
    return value;
}

ScenarioConfig scenario(const std::string& name)
{
    static const std::string dir = env_or_die("MARKET_SCENARIOS");
    return load_scenario(dir + "/" + name);
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// ---------------------------------------------------------------- criterion 1

void check_dataset_growth()
{
    auto start = Clock::now();
    ScenarioConfig config = scenario("hotdog_like.scn");
    ScenarioResult result = run_scenario(config);
    double elapsed = seconds_since(start);

    std::ostringstream detail;
    detail << result.initial_size << "->" << result.final_size << ", "
           << elapsed << "s";
    report(1, "dataset grows 1000 -> 1100 exactly",
           result.initial_size == 1000 && result.final_size == 1100 && elapsed < 10.0,
           detail.str());
}

// ---------------------------------------------------------------- criterion 2

void check_accuracy_uplift()
{
    auto start = Clock::now();
    ScenarioConfig verified = scenario("uplift_verified.scn");
    ScenarioConfig poisoned = scenario("uplift_poisoned.scn");

    const std::uint64_t seeds[] = {101, 102, 103, 104, 105};
    double initial_sum = 0.0;
    double verified_sum = 0.0;
    double poisoned_sum = 0.0;
    for (std::uint64_t seed : seeds) {
        verified.seed = seed;
        poisoned.seed = seed;
        ScenarioResult v = run_scenario(verified);
        ScenarioResult p = run_scenario(poisoned);
        initial_sum += v.initial_accuracy;
        verified_sum += v.final_accuracy;
        poisoned_sum += p.final_accuracy;
    }
    double n = double(std::size(seeds));
    double initial = initial_sum / n;
    double clean = verified_sum / n;
    double dirty = poisoned_sum / n;
    double elapsed = seconds_since(start);

    std::ostringstream detail;
    detail << "initial " << initial << ", verified " << clean << ", poisoned " << dirty
           << ", " << elapsed << "s";
    report(2, "verified runs gain >= 2 points, poisoned runs trail by >= 2",
           clean >= initial + 0.02 && dirty <= clean - 0.02 && elapsed < 60.0,
           detail.str());
}

// ---------------------------------------------------------------- criterion 3

void check_balance_dynamics()
{
    auto start = Clock::now();
    ScenarioConfig config = scenario("adversarial.scn");
    ScenarioResult result = run_scenario(config);
    double elapsed = seconds_since(start);

    std::size_t owner_i = 0, good_i = 0, mal_i = 0, ver_i = 0;
    for (std::size_t i = 0; i < config.agents.size(); ++i) {
        switch (config.agents[i].role) {
        case AgentRole::Owner: owner_i = i; break;
        case AgentRole::GoodContributor: good_i = i; break;
        case AgentRole::MaliciousContributor: mal_i = i; break;
        case AgentRole::Verifier: ver_i = i; break;
        }
    }
    (void)owner_i;

    const auto& rows = result.metrics.rows;
    bool non_increasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].balances[mal_i] > rows[i - 1].balances[mal_i]) {
            non_increasing = false;
        }
    }
    // A contribution round is a block in which at least one ADD landed.
    std::set<std::uint64_t> rounds;
    for (const ContractEvent& e : result.events) {
        if (e.kind == ContractEventKind::Add) {
            rounds.insert(e.height);
        }
    }
    Currency mal_initial = config.agents[mal_i].initial_balance;
    Currency mal_final = rows.back().balances[mal_i];
    bool good_whole = rows.back().balances[good_i] == config.agents[good_i].initial_balance;
    bool verifier_profit = rows.back().balances[ver_i] > config.agents[ver_i].initial_balance;

    std::ostringstream detail;
    detail << rounds.size() << " rounds, malicious " << format_coins(mal_initial) << "->"
           << format_coins(mal_final) << ", " << elapsed << "s";
    report(3, "malicious agent is drained, verifier profits, good agent made whole",
           rounds.size() >= 50 && non_increasing && mal_final * 20 <= mal_initial &&
               verifier_profit && good_whole && elapsed < 10.0,
           detail.str());
}

// ---------------------------------------------------------------- criterion 4

// Re-execute a journal block by block and check supply conservation and
// non-negativity after every seal.
bool conserved_per_block(const ScenarioConfig& config, const std::string& journal,
                         std::string& detail)
{
    MemoryBlobStore store;
    Chain loaded = Chain::load_journal(journal, &store);

    std::vector<std::pair<Address, Currency>> genesis_accounts;
    Currency supply = 0;
    for (const AgentSpec& agent : config.agents) {
        genesis_accounts.emplace_back(agent.address(), agent.initial_balance);
        supply += agent.initial_balance;
    }
    ContractRegistry registry(&store);
    Ledger led = Ledger::genesis(genesis_accounts, config.blocktime);
    led.set_handler(&registry);
    for (const Block& block : loaded.ledger().blocks()) {
        if (block.height == 0) {
            continue;
        }
        for (const Transaction& tx : block.transactions) {
            led.submit(tx);
        }
        led.seal_block();
        if (led.circulating_total() != supply) {
            detail = "supply drift at height " + std::to_string(block.height);
            return false;
        }
        for (const auto& [addr, account] : led.accounts()) {
            if (account.balance < 0) {
                detail = "negative balance at height " + std::to_string(block.height);
                return false;
            }
        }
        if (registry.held_total() < 0) {
            detail = "negative escrow at height " + std::to_string(block.height);
            return false;
        }
    }
    return true;
}

void check_conservation()
{
    bool pass = true;
    std::string detail;
    std::uint64_t blocks_checked = 0;
    for (const char* name :
         {"hotdog_like.scn", "adversarial.scn", "uplift_verified.scn", "uplift_poisoned.scn"}) {
        ScenarioConfig config = scenario(name);
        ScenarioResult result = run_scenario(config);
        std::string why;
        if (!conserved_per_block(config, result.journal, why)) {
            pass = false;
            detail = std::string(name) + ": " + why;
            break;
        }
        blocks_checked += config.blocks;
    }
    if (pass) {
        detail = std::to_string(blocks_checked) + " blocks checked";
    }
    report(4, "supply conserved exactly at every sealed block", pass, detail);
}

// ------------------------------------------------------- criteria 5 and 7

// Shared result of the fuzz campaign: criterion 5 consumes the state-machine
// findings, criterion 7 the replay-equivalence findings.
struct FuzzFindings {
    std::uint64_t sequences = 0;
    std::uint64_t operations = 0;
    std::uint64_t illegal_transitions = 0;
    std::uint64_t early_refunds = 0;
    std::uint64_t negative_balances = 0;
    std::uint64_t conservation_breaks = 0;
    std::uint64_t replay_divergences = 0;
};

bool legal_transition(ContributionStatus from, ContributionStatus to)
{
    if (from == to) {
        return true;
    }
    switch (from) {
    case ContributionStatus::Pending:
        return to == ContributionStatus::Challenged || to == ContributionStatus::Refunded;
    case ContributionStatus::Challenged:
        return to == ContributionStatus::Pending || to == ContributionStatus::Forfeited;
    case ContributionStatus::Refunded:
    case ContributionStatus::Forfeited:
        return false; // terminal
    }
    return false;
}

FuzzFindings run_fuzz(std::uint64_t sequences)
{
    FuzzFindings findings;
    std::mt19937_64 rng(0xf0221);

    const Address owner = Address::from_name("fuzz-owner");
    const Address alice = Address::from_name("fuzz-alice");
    const Address bob = Address::from_name("fuzz-bob");
    const std::vector<Address> actors{owner, alice, bob};
    const Currency supply = 40 * kCoin;

    for (std::uint64_t seq = 0; seq < sequences; ++seq) {
        MemoryBlobStore store;
        Chain chain({{owner, 20 * kCoin}, {alice, 10 * kCoin}, {bob, 10 * kCoin}}, 15, &store);

        DeployPayload deploy;
        deploy.model_bytes = serialize_model(make_model("perceptron", 1, 1.0));
        deploy.feature_dim = 1;
        deploy.class_set = {0, 1};
        deploy.test_digest = digest(std::string("1,1\n"));
        deploy.params = IncentiveParams{1 * kCoin, kCoin / 2, 2};
        Address contract = chain.next_contract_address(owner);
        chain.apply_one(owner, 3 * kCoin, std::move(deploy));

        std::map<std::uint64_t, ContributionStatus> prev_status;
        std::uint64_t ops = 8 + rng() % 8;
        for (std::uint64_t op = 0; op < ops; ++op) {
            const Address& sender = actors[rng() % actors.size()];
            // Deliberately include malformed values and ids so rejection
            // paths are exercised alongside the happy path.
            Currency value = (rng() % 4 == 0) ? Currency(rng() % (2 * kCoin)) : 1 * kCoin;
            std::uint64_t id = rng() % 4;
            Sample s;
            s.features = Eigen::VectorXd::Constant(1, double(int(rng() % 5) - 2));
            s.label = int(rng() & 1);

            switch (rng() % 6) {
            case 0:
                chain.submit(sender, value, AddDataPayload{contract, s});
                break;
            case 1:
                chain.submit(sender, value, VerifyPayload{contract, id, s});
                break;
            case 2:
                chain.submit(sender, rng() % 8 == 0 ? value : 0,
                             AdjudicatePayload{contract, id, (rng() & 1) != 0});
                break;
            case 3:
                chain.submit(sender, rng() % 8 == 0 ? value : 0,
                             ClaimRefundPayload{contract, id});
                break;
            case 4: // empty block lets timeouts elapse
                break;
            case 5:
                chain.submit(sender, value % kCoin, TransferPayload{actors[rng() % 3]});
                break;
            }
            chain.seal();
            ++findings.operations;

            const ModelContract& c = chain.registry().at(contract);
            for (const ContributionRecord& record : c.contributions) {
                auto it = prev_status.find(record.id);
                ContributionStatus before =
                    it == prev_status.end() ? ContributionStatus::Pending : it->second;
                if (!legal_transition(before, record.status)) {
                    ++findings.illegal_transitions;
                }
                prev_status[record.id] = record.status;
            }
            for (const Address& actor : actors) {
                if (chain.ledger().balance_of(actor) < 0) {
                    ++findings.negative_balances;
                }
            }
            if (chain.ledger().circulating_total() != supply) {
                ++findings.conservation_breaks;
            }
        }

        // Refund events must respect the timeout inequality.
        const ModelContract& c = chain.registry().at(contract);
        for (const ContractEvent& event : chain.registry().events()) {
            if (event.kind != ContractEventKind::Refund) {
                continue;
            }
            const ContributionRecord& record = c.contributions.at(*event.contribution_id);
            if (event.height < record.submitted_at + c.params.timeout_blocks) {
                ++findings.early_refunds;
            }
        }
        // Replay property after the whole fuzzed history.
        if (ContractRegistry::replay_model(c) != c.model_bytes) {
            ++findings.replay_divergences;
        }
        ++findings.sequences;
    }
    return findings;
}

void check_escrow_fuzz(const FuzzFindings& findings)
{
    std::ostringstream detail;
    detail << findings.sequences << " sequences, " << findings.operations << " operations";
    report(5, "escrow fuzzing finds no illegal transitions, early refunds, or overdrafts",
           findings.sequences >= 10000 && findings.illegal_transitions == 0 &&
               findings.early_refunds == 0 && findings.negative_balances == 0 &&
               findings.conservation_breaks == 0,
           detail.str());
}

// ---------------------------------------------------------------- criterion 6

void check_hash_conformance()
{
    bool vectors_ok =
        digest(std::string("")).hex() ==
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855" &&
        digest(std::string("abc")).hex() ==
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad" &&
        digest(std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")).hex() ==
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1";

    std::mt19937_64 rng(0x5a5a);
    int oracle_matches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::uint8_t> payload(rng() % 300);
        for (auto& byte : payload) {
            byte = std::uint8_t(rng());
        }
        std::array<std::uint8_t, 32> expect{};
        SHA256(payload.data(), payload.size(), expect.data());
        if (digest(payload).bytes == expect) {
            ++oracle_matches;
        }
    }

    // Every single-byte mutation of the committed test payload must be
    // rejected by evaluation.
    ModelContract contract;
    contract.model_bytes = serialize_model(make_model("perceptron", 1, 1.0));
    contract.initial_model_bytes = contract.model_bytes;
    contract.feature_dim = 1;
    contract.class_set = {0, 1};
    std::string payload = "0,-1\n1,1\n0,-2\n1,2\n";
    contract.test_digest = digest(payload);
    int mutations_rejected = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::string mutated = payload;
        std::size_t pos = rng() % mutated.size();
        char flip = char(rng());
        if (flip == mutated[pos]) {
            flip = char(flip + 1);
        }
        mutated[pos] = flip;
        try {
            (void)evaluate_contract(contract, mutated);
        } catch (const ContractError& e) {
            if (std::string(e.what()) == "DigestMismatch") {
                ++mutations_rejected;
            }
        }
    }
    bool untouched_ok = evaluate_contract(contract, payload) >= 0.0;

    std::ostringstream detail;
    detail << "oracle " << oracle_matches << "/1000, mutations rejected " << mutations_rejected
           << "/1000";
    report(6, "digest matches FIPS vectors and oracle; tampered payloads rejected",
           vectors_ok && oracle_matches == 1000 && mutations_rejected == 1000 && untouched_ok,
           detail.str());
}

// ---------------------------------------------------------------- criterion 7

double log_loss(const Eigen::VectorXd& w, double b, const Sample& s)
{
    double z = w.dot(s.features) + b;
    double p = 1.0 / (1.0 + std::exp(-z));
    return s.label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

void check_replay_and_gradients(const FuzzFindings& findings)
{
    std::mt19937_64 rng(0x99e5);
    std::normal_distribution<double> n(0.0, 1.0);
    const int dim = 3;
    const double eps = 1e-6;
    int gradient_ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        LogisticModel m;
        m.weights.resize(dim);
        for (int i = 0; i < dim; ++i) {
            m.weights[i] = n(rng);
        }
        m.bias = n(rng);
        m.learning_rate = 0.05;
        Sample s;
        s.features.resize(dim);
        for (int i = 0; i < dim; ++i) {
            s.features[i] = n(rng);
        }
        s.label = int(rng() & 1);

        OnlineModel next = update(OnlineModel(m), s);
        const auto& got = std::get<LogisticModel>(next);
        bool ok = true;
        auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
        };
        for (int i = 0; i < dim; ++i) {
            Eigen::VectorXd wp = m.weights, wm = m.weights;
            wp[i] += eps;
            wm[i] -= eps;
            double grad = (log_loss(wp, m.bias, s) - log_loss(wm, m.bias, s)) / (2 * eps);
            if (!close(got.weights[i], m.weights[i] - m.learning_rate * grad)) {
                ok = false;
            }
        }
        double gb =
            (log_loss(m.weights, m.bias + eps, s) - log_loss(m.weights, m.bias - eps, s)) /
            (2 * eps);
        if (!close(got.bias, m.bias - m.learning_rate * gb)) {
            ok = false;
        }
        if (ok) {
            ++gradient_ok;
        }
    }

    std::ostringstream detail;
    detail << findings.sequences << " fuzzed histories replayed, gradient " << gradient_ok
           << "/100";
    report(7, "live model equals fold replay; logistic step matches finite differences",
           findings.replay_divergences == 0 && gradient_ok == 100, detail.str());
}

// ---------------------------------------------------------------- criterion 8

void check_determinism()
{
    bool pass = true;
    std::string detail;
    fs::path base = fs::temp_directory_path() / "market-acceptance-determinism";
    fs::remove_all(base);
    for (const char* name :
         {"hotdog_like.scn", "adversarial.scn", "uplift_verified.scn", "uplift_poisoned.scn"}) {
        ScenarioConfig config = scenario(name);
        ScenarioResult a = run_scenario(config);
        ScenarioResult b = run_scenario(config);
        export_metrics(a, base / "a");
        export_metrics(b, base / "b");
        bool same = a.journal == b.journal;
        for (const char* csv :
             {"balances.csv", "dataset_growth.csv", "accuracy.csv", "events.csv"}) {
            same = same && read_file(base / "a" / csv) == read_file(base / "b" / csv);
        }
        if (!same) {
            pass = false;
            detail = std::string(name) + " diverged";
            break;
        }
    }
    fs::remove_all(base);
    report(8, "equal seeds give byte-identical logs and CSV exports", pass, detail);
}

// ---------------------------------------------------------------- criterion 9

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args)
{
    static const std::string cli = env_or_die("MARKET_CLI");
    std::string command = cli + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    CliResult result;
    if (pipe == nullptr) {
        return result;
    }
    char buffer[512];
    while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) {
        result.output += buffer;
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

// The deploy command prints the event row followed by "contract <hex>".
std::string deployed_contract(const std::string& output)
{
    std::istringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.starts_with("contract ")) {
            return line.substr(9);
        }
    }
    return {};
}

Currency workspace_balance(const fs::path& ws, const Address& addr)
{
    DirBlobStore store(ws / "blobs");
    Chain chain = Chain::load_journal(read_file(ws / "ledger.log"), &store);
    return chain.ledger().balance_of(addr);
}

// Challenge flow: a bad contribution is challenged, the challenge accepted,
// the contributor's deposit forfeited to the verifier plus the reward.
bool challenge_walkthrough(const fs::path& root, std::string& detail)
{
    fs::path ws = root / "challenge";
    write_file(root / "train.csv", "0,-2,0\n1,2,0\n0,-3,1\n1,3,-1\n");
    write_file(root / "test.csv", "0,-2,1\n1,2,-1\n0,-4,0\n1,4,0\n");
    write_file(root / "tampered.csv", "0,-2,1\n1,2,-1\n0,-4,0\n1,4,1\n");

    auto fail = [&](const std::string& step, const CliResult& r) {
        detail = step + " -> exit " + std::to_string(r.exit_code) + ": " + r.output;
        return false;
    };

    std::string common = "contract --workspace " + ws.string() + " ";
    CliResult r = run_cli(common + "deploy --init --account owner=100 --account userc=10 " +
                          "--account vera=10 --from owner --model-kind perceptron --dim 2 " +
                          "--lr 1 --train-file " + (root / "train.csv").string() +
                          " --test-file " + (root / "test.csv").string() +
                          " --deposit 1 --reward 0.5 --timeout 3 --pool 5");
    if (r.exit_code != 0) {
        return fail("deploy", r);
    }
    std::string contract_hex = deployed_contract(r.output);
    if (contract_hex.size() != 40) {
        return fail("deploy output", r);
    }

    // Mislabeled contribution: deposit leaves the contributor's balance.
    r = run_cli(common + "add-data --from userc --contract " + contract_hex +
                " --label 1 --features -3,0");
    if (r.exit_code != 0) {
        return fail("add-data", r);
    }
    if (workspace_balance(ws, Address::from_name("userc")) != 9 * kCoin) {
        detail = "contributor balance after deposit != 9";
        return false;
    }

    // Refund before the timeout must be refused without state change.
    r = run_cli(common + "claim-refund --from userc --contract " + contract_hex + " --id 0");
    if (r.exit_code != 2 || r.output.find("TooEarly") == std::string::npos) {
        return fail("early claim-refund", r);
    }

    r = run_cli(common + "verify --from vera --contract " + contract_hex +
                " --id 0 --label 0 --features -3,0");
    if (r.exit_code != 0) {
        return fail("verify", r);
    }
    if (workspace_balance(ws, Address::from_name("vera")) != 9 * kCoin) {
        detail = "verifier balance after stake != 9";
        return false;
    }

    r = run_cli(common + "adjudicate --from owner --contract " + contract_hex +
                " --id 0 --accept");
    if (r.exit_code != 0) {
        return fail("adjudicate", r);
    }

    // Settlement: verifier = initial + forfeited deposit + reward, the
    // contributor is down one deposit.
    Currency vera = workspace_balance(ws, Address::from_name("vera"));
    Currency userc = workspace_balance(ws, Address::from_name("userc"));
    if (vera != 10 * kCoin + kCoin + kCoin / 2 || userc != 9 * kCoin) {
        detail = "settlement balances wrong: vera " + format_coins(vera) + ", userc " +
                 format_coins(userc);
        return false;
    }

    r = run_cli(common + "evaluate --contract " + contract_hex + " --test-file " +
                (root / "test.csv").string());
    if (r.exit_code != 0 || r.output.find("accuracy=") == std::string::npos) {
        return fail("evaluate", r);
    }
    r = run_cli(common + "evaluate --contract " + contract_hex + " --test-file " +
                (root / "tampered.csv").string());
    if (r.exit_code != 2 || r.output.find("DigestMismatch") == std::string::npos) {
        return fail("evaluate tampered", r);
    }

    // Terminal status survives workspace reload.
    {
        DirBlobStore store(ws / "blobs");
        Chain chain = Chain::load_journal(read_file(ws / "ledger.log"), &store);
        auto id = Address::from_hex(contract_hex);
        const ModelContract& c = chain.registry().at(*id);
        if (c.contributions.at(0).status != ContributionStatus::Forfeited) {
            detail = "contribution not Forfeited after accept";
            return false;
        }
        if (c.reward_pool != 4 * kCoin + kCoin / 2) {
            detail = "pool after reward != 4.5";
            return false;
        }
    }
    return true;
}

// Clean flow: a good contribution trains the model on-chain and the deposit
// comes back after the timeout.
bool refund_walkthrough(const fs::path& root, std::string& detail)
{
    fs::path ws = root / "refund";
    auto fail = [&](const std::string& step, const CliResult& r) {
        detail = step + " -> exit " + std::to_string(r.exit_code) + ": " + r.output;
        return false;
    };

    std::string common = "contract --workspace " + ws.string() + " ";
    CliResult r = run_cli(common + "deploy --init --account owner=100 --account userb=10 " +
                          "--from owner --model-kind perceptron --dim 2 --lr 1 " +
                          "--train-file " + (root / "train.csv").string() + " --test-file " +
                          (root / "test.csv").string() +
                          " --deposit 1 --reward 0.5 --timeout 3 --pool 5");
    if (r.exit_code != 0) {
        return fail("deploy", r);
    }
    std::string contract_hex = deployed_contract(r.output);
    if (contract_hex.size() != 40) {
        return fail("deploy output", r);
    }

    r = run_cli(common + "add-data --from userb --contract " + contract_hex +
                " --label 0 --features -9,9");
    if (r.exit_code != 0) {
        return fail("add-data", r);
    }
    if (workspace_balance(ws, Address::from_name("userb")) != 9 * kCoin) {
        detail = "contributor balance after deposit != 9";
        return false;
    }

    // The single on-chain training step must equal the standalone update.
    {
        DirBlobStore store(ws / "blobs");
        Chain chain = Chain::load_journal(read_file(ws / "ledger.log"), &store);
        const ModelContract& c = chain.registry().at(*Address::from_hex(contract_hex));
        Sample s;
        s.features = Eigen::Vector2d(-9.0, 9.0);
        s.label = 0;
        OnlineModel stepped = update(deserialize_model(c.initial_model_bytes), s);
        if (serialize_model(stepped) != c.model_bytes) {
            detail = "on-chain model step diverges from the standalone update";
            return false;
        }
    }

    r = run_cli(common + "advance --blocks 3");
    if (r.exit_code != 0) {
        return fail("advance", r);
    }
    r = run_cli(common + "claim-refund --from userb --contract " + contract_hex + " --id 0");
    if (r.exit_code != 0) {
        return fail("claim-refund", r);
    }
    if (workspace_balance(ws, Address::from_name("userb")) != 10 * kCoin) {
        detail = "contributor not made whole after refund";
        return false;
    }

    r = run_cli(common + "lineage --contract " + contract_hex);
    if (r.exit_code != 0 || r.output.find(contract_hex) == std::string::npos) {
        return fail("lineage", r);
    }

    DirBlobStore store(ws / "blobs");
    Chain chain = Chain::load_journal(read_file(ws / "ledger.log"), &store);
    const ModelContract& c = chain.registry().at(*Address::from_hex(contract_hex));
    if (c.contributions.at(0).status != ContributionStatus::Refunded) {
        detail = "contribution not Refunded after claim";
        return false;
    }
    return true;
}

void check_cli_walkthroughs()
{
    fs::path root = fs::temp_directory_path() / "market-acceptance-cli";
    fs::remove_all(root);
    fs::create_directories(root);
    std::string detail;
    bool pass = challenge_walkthrough(root, detail) && refund_walkthrough(root, detail);
    fs::remove_all(root);
    report(9, "scripted CLI protocol walkthroughs settle with documented balances", pass,
           detail);
}

} // namespace

int main()
{
    check_dataset_growth();
    check_accuracy_uplift();
    check_balance_dynamics();
    check_conservation();
    FuzzFindings findings = run_fuzz(10000);
    check_escrow_fuzz(findings);
    check_hash_conformance();
    check_replay_and_gradients(findings);
    check_determinism();
    check_cli_walkthroughs();

    if (g_failures != 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
