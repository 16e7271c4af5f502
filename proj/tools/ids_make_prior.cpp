// Writes a random finite-support prior file for `ids_experiment --env finite:PATH`.

#include "ids/beliefs.hpp"
#include "ids/text_format.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Generate a random finite-support prior over tabular MDPs"};
    std::size_t states = 2, actions = 2, horizon = 2, envs = 6, options = 0;
    std::uint64_t seed = 0;
    double concentration = 1.0;
    std::string out;
    app.add_option("--S", states)->capture_default_str();
    app.add_option("--A", actions)->capture_default_str();
    app.add_option("--H", horizon)->capture_default_str();
    app.add_option("--envs", envs, "number of environments (uniform weights)")->capture_default_str();
    app.add_option("--layer-options", options,
                   "if > 0, build a layer-independent prior with this many kernels per layer instead")
        ->capture_default_str();
    app.add_option("--concentration", concentration, "Dirichlet parameter of each random kernel row")
        ->capture_default_str();
    app.add_option("--seed", seed)->capture_default_str();
    app.add_option("--out", out, "output file")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        if (states == 0 || actions == 0 || horizon == 0 || envs == 0 || !(concentration > 0.0)) {
            throw ids::ConfigError("sizes and concentration must be positive");
        }
        const ids::MdpShape shape{states, actions, horizon};
        ids::Rng rng = ids::make_rng(seed, 0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> rewards(shape.reward_size());
        for (double& r : rewards) { r = unit(rng); }
        const std::vector<double> alpha(states, concentration);
        auto random_block = [&](std::size_t rows) {
            std::vector<double> block;
            for (std::size_t k = 0; k < rows; ++k) {
                const auto row = ids::sample_dirichlet(alpha, rng);
                block.insert(block.end(), row.begin(), row.end());
            }
            return block;
        };

        ids::Posterior prior = [&]() -> ids::Posterior {
            if (options > 0) {
                std::vector<std::vector<ids::FiniteSupportPrior::LayerOption>> layers(horizon);
                for (auto& layer : layers) {
                    for (std::size_t k = 0; k < options; ++k) {
                        layer.push_back({random_block(states * actions), 1.0 / double(options)});
                    }
                }
                return ids::FiniteSupportPrior::layer_product(shape, layers, rewards, 0);
            }
            std::vector<ids::TabularMdp> list;
            for (std::size_t i = 0; i < envs; ++i) {
                list.emplace_back(shape, random_block(horizon * states * actions), rewards, 0);
            }
            return ids::FiniteSupportPrior(std::move(list), std::vector<double>(envs, 1.0 / double(envs)));
        }();
        ids::save_document(out, ids::to_document(prior));
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
