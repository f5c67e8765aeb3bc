#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "stars/commands.hpp"
#include "stars/error.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string strategy;
    int few_shot = -1;
    std::string mock_script;
    std::string k_values;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration file (JSON)")
        ->required();
    cmd->add_option("--strategy", args.strategy,
                    "Override strategy: single-prompt, cot or stars");
    cmd->add_option("--few-shot", args.few_shot,
                    "Override few-shot example count (stars only)");
    cmd->add_option("--mock-script", args.mock_script,
                    "Override mock script / replay transcript path");
    cmd->add_option("--k", args.k_values, "Override k list, e.g. 3,5,7,10");
}

std::vector<std::size_t> parse_k_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string field = csv.substr(start, comma - start);
        if (!field.empty()) out.push_back(std::stoul(field));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

stars::RunConfig load_with_overrides(const CommonArgs& args) {
    stars::RunConfig config = stars::RunConfig::load(args.config_path);
    if (!args.strategy.empty()) {
        config.strategy.kind = stars::strategy_kind_from_string(args.strategy);
        if (config.strategy.kind != stars::StrategyKind::Stars) {
            config.strategy.few_shot_count = 0;
        }
    }
    if (args.few_shot >= 0) {
        config.strategy.few_shot_count = static_cast<std::size_t>(args.few_shot);
    }
    if (!args.mock_script.empty()) {
        config.gateway.mock_script_path = args.mock_script;
    }
    if (!args.k_values.empty()) {
        config.k_list = parse_k_list(args.k_values);
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

    CLI::App app{"stars - map companies to the technologies they work with"};
    app.require_subcommand(1);

    CommonArgs extract_args;
    auto* extract = app.add_subcommand(
        "extract", "Run entity extraction for every company in the corpus");
    add_common(extract, extract_args);

    CommonArgs embed_args;
    auto* embed = app.add_subcommand(
        "embed", "Embed the technology lexicon and company profiles");
    add_common(embed, embed_args);

    CommonArgs rank_args;
    std::string rank_query;
    std::string rank_direction = "com-tech";
    std::size_t rank_k = 10;
    auto* rank = app.add_subcommand("rank", "Rank against one query id");
    add_common(rank, rank_args);
    rank->add_option("--query", rank_query, "Company id or technology id")
        ->required();
    rank->add_option("--direction", rank_direction, "com-tech or tech-com");
    rank->add_option("--top", rank_k, "How many results to return");

    CommonArgs eval_args;
    std::string experiment = "ablation";
    auto* evaluate =
        app.add_subcommand("evaluate", "Run an experiment and emit reports");
    add_common(evaluate, eval_args);
    evaluate->add_option(
        "--experiment", experiment,
        "ablation, few-shot-sweep or ranking-comparison");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            stars::cmd_extract(load_with_overrides(extract_args), std::cout);
        } else if (embed->parsed()) {
            stars::cmd_embed(load_with_overrides(embed_args), std::cout);
        } else if (rank->parsed()) {
            stars::cmd_rank(load_with_overrides(rank_args), rank_query,
                            stars::direction_from_string(rank_direction), rank_k,
                            std::cout);
        } else if (evaluate->parsed()) {
            stars::cmd_evaluate(load_with_overrides(eval_args), experiment,
                                std::cout);
        }
    } catch (const stars::ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return 1;
    } catch (const stars::ValidationError& e) {
        spdlog::error("validation error: {}", e.what());
        return 1;
    } catch (const stars::ParseError& e) {
        spdlog::error("parse error: {}", e.what());
        return 1;
    } catch (const stars::Error& e) {
        spdlog::error("runtime failure: {}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("unexpected failure: {}", e.what());
        return 2;
    }
    return 0;
}
