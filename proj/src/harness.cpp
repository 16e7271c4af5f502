#include "ids/harness.hpp"

#include "ids/text_format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

namespace ids {

EnvSpec parse_env_spec(std::string_view text) {
    EnvSpec spec;
    if (text == "dirichlet") {
        spec.mode = EnvMode::dirichlet;
    } else if (text == "chain") {
        spec.mode = EnvMode::chain;
    } else if (text.substr(0, 7) == "finite:" && text.size() > 7) {
        spec.mode = EnvMode::finite;
        spec.path = std::string(text.substr(7));
    } else {
        throw ConfigError("unknown env '" + std::string(text) + "' (expected dirichlet, chain or finite:PATH)");
    }
    return spec;
}

std::string env_spec_name(const EnvSpec& spec) {
    switch (spec.mode) {
    case EnvMode::dirichlet: return "dirichlet";
    case EnvMode::chain: return "chain";
    case EnvMode::finite: return "finite:" + spec.path;
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    if (env.mode != EnvMode::finite && (states == 0 || actions == 0 || horizon == 0)) {
        throw ConfigError("S, A and H must be at least 1");
    }
    if (episodes < 2) { throw ConfigError("episodes must be at least 2"); }
    if (runs == 0) { throw ConfigError("runs must be at least 1"); }
    if (threads == 0) { throw ConfigError("threads must be at least 1"); }
    if (!(env.prior_count > 0.0 && std::isfinite(env.prior_count))) {
        throw ConfigError("prior count must be positive");
    }
    if (agent.kind == AgentKind::surrogate_ids && env.mode != EnvMode::finite) {
        throw ConfigError("the surrogate agent requires --env finite:PATH");
    }
    agent.validate();
}

TabularMdp chain_mdp(const MdpShape& shape) {
    std::vector<double> transitions(shape.transition_size(), 0.0);
    std::vector<double> rewards(shape.reward_size(), 0.0);
    const std::size_t last = shape.states - 1;
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        for (std::size_t s = 0; s < shape.states; ++s) {
            for (std::size_t a = 0; a < shape.actions; ++a) {
                std::size_t next = s;
                if (a == 0) { next = s == 0 ? 0 : s - 1; }
                if (a == 1) { next = std::min(s + 1, last); }
                transitions[shape.row_offset(h, s, a) + next] = 1.0;
                rewards[shape.sa_index(h, s, a)] = s == last ? 1.0 : 0.0;
            }
        }
    }
    return TabularMdp(shape, std::move(transitions), std::move(rewards), 0);
}

Posterior make_prior(const ExperimentConfig& config) {
    const MdpShape shape{config.states, config.actions, config.horizon};
    switch (config.env.mode) {
    case EnvMode::dirichlet: {
        Rng rng = make_rng(config.seed, kRewardStream);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> rewards(shape.reward_size());
        for (double& r : rewards) { r = unit(rng); }
        return DirichletProduct::symmetric(shape, std::move(rewards), 0, config.env.prior_count);
    }
    case EnvMode::chain: {
        const TabularMdp chain = chain_mdp(shape);
        return DirichletProduct::symmetric(shape, {chain.rewards().begin(), chain.rewards().end()}, 0,
                                           config.env.prior_count);
    }
    case EnvMode::finite: return posterior_from_document(load_document(config.env.path));
    }
    throw ConfigError("unknown env mode");
}

TabularMdp generate_true_env(const ExperimentConfig& config, const Posterior& prior, Rng& rng) {
    if (config.env.mode == EnvMode::chain) { return chain_mdp(shape_of(prior)); }
    return sample_env(prior, rng);
}

namespace {

RunRecord run_once(const ExperimentConfig& config, const Posterior& prior, const Partition* partition,
                   std::size_t run) {
    const std::uint64_t run_seed = derive_seed(config.seed, run);
    Rng env_rng = make_rng(run_seed, kEnvStream);
    Rng agent_rng = make_rng(run_seed, kAgentStream);
    Rng sim_rng = make_rng(run_seed, kSimulationStream);

    const TabularMdp truth = generate_true_env(config, prior, env_rng);
    const double optimal = backward_induction(truth).values.value(0, truth.initial_state());

    RunRecord record;
    record.run = run;
    record.episodes.reserve(config.episodes);
    Posterior posterior = prior;
    double cumulative = 0.0;
    for (std::size_t ep = 0; ep < config.episodes; ++ep) {
        const EpisodeDecision decision = decide(posterior, config.episodes, config.agent, partition, agent_rng);
        const Trajectory trajectory = simulate_episode(truth, decision.policy, sim_rng);
        const double regret = optimal - initial_value(truth, decision.policy);
        cumulative += std::max(regret, 0.0);
        record.episodes.push_back({ep + 1, trajectory.total_reward(), regret, cumulative,
                                   decision.diagnostics.info_gain, decision.diagnostics.info_ratio,
                                   decision.diagnostics.lambda_used});
        posterior = update(posterior, trajectory);
    }
    return record;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& input) {
    input.validate();
    ExperimentResult result;
    result.config = input;
    const Posterior prior = make_prior(input);
    const MdpShape shape = shape_of(prior);
    result.config.states = shape.states;
    result.config.actions = shape.actions;
    result.config.horizon = shape.horizon;
    const ExperimentConfig& config = result.config;
    result.overlays = bound_overlays(shape.states, shape.actions, shape.horizon, config.episodes,
                                     std::min(config.agent.epsilon, 4.0 * double(shape.horizon * shape.horizon)));

    std::optional<Partition> partition;
    if (config.agent.kind == AgentKind::surrogate_ids) {
        partition = build_partition(std::get<FiniteSupportPrior>(prior), config.agent.epsilon);
    }
    const Partition* partition_ptr = partition ? &*partition : nullptr;

    result.runs.resize(config.runs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < config.runs; r = next++) {
            try {
                result.runs[r] = run_once(config, prior, partition_ptr, r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) { failure = std::current_exception(); }
                next = config.runs;
            }
        }
    };
    const std::size_t workers = std::min(config.threads, config.runs);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) { pool.emplace_back(worker); }
    }
    if (failure) { std::rethrow_exception(failure); }
    return result;
}

std::vector<AggregateRow> aggregate(const ExperimentResult& result) {
    if (result.runs.empty()) { throw std::invalid_argument("no runs to aggregate"); }
    const std::size_t episodes = result.runs.front().episodes.size();
    const double n = double(result.runs.size());
    auto mean_se = [&](std::size_t ep, double EpisodeRecord::*field) {
        double sum = 0.0;
        for (const auto& run : result.runs) { sum += run.episodes[ep].*field; }
        const double mean = sum / n;
        if (result.runs.size() < 2) { return std::pair{mean, 0.0}; }
        double ss = 0.0;
        for (const auto& run : result.runs) {
            const double d = run.episodes[ep].*field - mean;
            ss += d * d;
        }
        return std::pair{mean, std::sqrt(ss / (n - 1.0) / n)};
    };
    std::vector<AggregateRow> rows;
    rows.reserve(episodes);
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        AggregateRow row;
        row.episode = ep + 1;
        std::tie(row.mean_regret, row.se_regret) = mean_se(ep, &EpisodeRecord::regret);
        std::tie(row.mean_cum_regret, row.se_cum_regret) = mean_se(ep, &EpisodeRecord::cum_regret);
        row.mean_info_gain = mean_se(ep, &EpisodeRecord::info_gain).first;
        row.mean_info_ratio = mean_se(ep, &EpisodeRecord::info_ratio).first;
        rows.push_back(row);
    }
    return rows;
}

namespace {

void write_preamble(std::ostream& out, const ExperimentConfig& c) {
    out << "# ids-experiment-csv v1\n";
    out << "# agent=" << agent_name(c.agent.kind) << " env=" << env_spec_name(c.env) << " S=" << c.states
        << " A=" << c.actions << " H=" << c.horizon << " L=" << c.episodes << " runs=" << c.runs
        << " seed=" << c.seed << '\n';
}

} // namespace

void write_episode_csv(std::ostream& out, const ExperimentResult& result) {
    write_preamble(out, result.config);
    out << "run,episode,regret,cum_regret,info_gain,info_ratio,lambda\n";
    for (const auto& run : result.runs) {
        for (const auto& e : run.episodes) {
            out << run.run << ',' << e.episode << ',' << format_double(e.regret) << ','
                << format_double(e.cum_regret) << ',' << format_double(e.info_gain) << ','
                << format_double(e.info_ratio) << ',' << format_double(e.lambda) << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream& out, const ExperimentResult& result) {
    write_preamble(out, result.config);
    out << "episode,mean_regret,se_regret,mean_cum_regret,se_cum_regret,mean_info_gain,mean_info_ratio,"
           "bound_vanilla,bound_regularized,bound_surrogate,log_cover\n";
    const auto& b = result.overlays;
    for (const auto& row : aggregate(result)) {
        out << row.episode << ',' << format_double(row.mean_regret) << ',' << format_double(row.se_regret) << ','
            << format_double(row.mean_cum_regret) << ',' << format_double(row.se_cum_regret) << ','
            << format_double(row.mean_info_gain) << ',' << format_double(row.mean_info_ratio) << ','
            << format_double(b.vanilla) << ',' << format_double(b.regularized) << ','
            << format_double(b.surrogate) << ',' << format_double(b.log_cover) << '\n';
    }
}

void write_regret_svg(std::ostream& out, const ExperimentResult& result) {
    const auto rows = aggregate(result);
    const auto& b = result.overlays;
    const double width = 640, height = 400, margin = 50;
    const double y_max = std::max({b.vanilla, b.regularized, b.surrogate, rows.back().mean_cum_regret, 1e-12});
    const double x_max = double(std::max<std::size_t>(rows.size(), 2));
    auto px = [&](double ep) { return margin + (ep - 1.0) / (x_max - 1.0) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - y / y_max * (height - 2 * margin); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << py(0) << "\" x2=\"" << width - margin << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << py(0) << "\" x2=\"" << margin << "\" y2=\"" << margin
        << "\" stroke=\"black\"/>\n";
    const struct {
        double value;
        const char* label;
        const char* colour;
    } overlays[] = {{b.vanilla, "vanilla bound", "#d62728"},
                    {b.regularized, "regularized bound", "#ff7f0e"},
                    {b.surrogate, "surrogate bound", "#2ca02c"}};
    for (const auto& o : overlays) {
        out << "<line x1=\"" << margin << "\" y1=\"" << py(o.value) << "\" x2=\"" << width - margin << "\" y2=\""
            << py(o.value) << "\" stroke=\"" << o.colour << "\" stroke-dasharray=\"6 4\"/>\n";
        out << "<text x=\"" << width - margin << "\" y=\"" << py(o.value) - 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << o.label << "</text>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& row : rows) { out << px(double(row.episode)) << ',' << py(row.mean_cum_regret) << ' '; }
    out << "\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"" << margin - 10 << "\" font-size=\"13\">mean cumulative regret ("
        << agent_name(result.config.agent.kind) << ", " << result.runs.size() << " runs)</text>\n";
    out << "</svg>\n";
}

void emit_outputs(const ExperimentResult& result, const std::string& out_dir, bool emit_plots) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) { throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message()); }
    auto write = [&](const char* name, auto&& writer) {
        const auto path = std::filesystem::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) { throw std::runtime_error("cannot open '" + path.string() + "' for writing"); }
        writer(out, result);
        if (!out) { throw std::runtime_error("failed writing '" + path.string() + "'"); }
    };
    write("episodes.csv", write_episode_csv);
    write("aggregate.csv", write_aggregate_csv);
    if (emit_plots) { write("cumulative_regret.svg", write_regret_svg); }
}

} // namespace ids
