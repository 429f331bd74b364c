#include "gts/bench.hpp"
#include "gts/error.hpp"
#include "gts/log.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>

namespace {

std::atomic<bool> stop_requested{false};

extern "C" void on_sigint(int) { stop_requested.store(true); }

struct Common {
    std::string config;
    bool mock = false;
    int workers = 0;
    std::string run_id;
};

void add_common(CLI::App* cmd, Common& c, bool run_flags) {
    cmd->add_option("--config", c.config, "Benchmark configuration (JSON)")->required();
    cmd->add_flag("--mock", c.mock, "Use the scripted mock backend from the config");
    cmd->add_option("--run-id", c.run_id, "Run directory name under runs_root");
    if (run_flags) cmd->add_option("--workers", c.workers, "Videos processed concurrently")->check(CLI::PositiveNumber);
}

gts::BenchConfig load_config(const Common& c) {
    auto cfg = gts::BenchConfig::load(c.config);
    if (c.mock) cfg.mock = true;
    if (c.workers > 0) cfg.workers = c.workers;
    if (!c.run_id.empty()) cfg.run_id = c.run_id;
    if (const char* root = std::getenv("GTS_FRAME_ROOT"); root && *root) cfg.frame_root = root;
    cfg.validate();
    return cfg;
}

std::vector<gts::AblationVariant> pick_variants(const std::vector<std::string>& names) {
    const auto all = gts::bench::standard_variants();
    if (names.empty()) return all;
    std::vector<gts::AblationVariant> out;
    for (const auto& n : names) {
        auto it = std::find_if(all.begin(), all.end(), [&](const auto& v) { return v.name == n; });
        if (it == all.end()) throw gts::UsageError("unknown ablation variant '" + n + "'");
        out.push_back(*it);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Glance-then-scrutinize video anomaly benchmark"};
    app.require_subcommand(1);

    Common run_opts, eval_opts, ablate_opts, validate_opts, conf_opts;
    bool eval_json = false;
    std::vector<std::string> variants;

    auto* run = app.add_subcommand("run", "Run the pipeline over every annotated video");
    add_common(run, run_opts, true);
    auto* eval = app.add_subcommand("eval", "Score a finished run against the annotations");
    add_common(eval, eval_opts, false);
    eval->add_flag("--json", eval_json, "Print the summary as JSON instead of a table");
    auto* ablate = app.add_subcommand("ablate", "Run and compare ablation variants");
    add_common(ablate, ablate_opts, true);
    ablate->add_option("--variants", variants,
                       "Variants to compare, first is the reference: base, no_dynamic_text, no_static_text, "
                       "uniform_sampling, no_context")
        ->delimiter(',');
    auto* validate = app.add_subcommand("validate-dataset", "Check annotations, frames and embedding files");
    add_common(validate, validate_opts, false);
    auto* conformance = app.add_subcommand("conformance", "Check the configured backends against the wire contract");
    add_common(conformance, conf_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gts::bench::exit_usage;
    }

    try {
        if (*run) {
            const auto cfg = load_config(run_opts);
            std::signal(SIGINT, on_sigint);
            const auto outcome = gts::bench::cmd_run(cfg, gts::bench::make_gateway(cfg), &stop_requested);
            std::cout << outcome.run_dir.string() << ": " << outcome.succeeded << " ok, " << outcome.failed
                      << " failed, " << outcome.skipped << " skipped\n";
            return outcome.exit_code();
        }
        if (*eval) {
            const auto cfg = load_config(eval_opts);
            const auto annotations = gts::dataset::load_annotations(cfg.annotations);
            const auto result = gts::bench::cmd_eval(cfg.run_dir(), annotations, gts::bench::make_gateway(cfg));
            nlohmann::json doc = result.summary.to_json();
            doc["videos"] = nlohmann::json::array();
            for (const auto& r : result.records)
                doc["videos"].push_back({{"video_id", r.video_id},
                                         {"scores", r.scores ? gts::dataset::to_json(*r.scores) : nlohmann::json(nullptr)},
                                         {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}});
            gts::dataset::write_json_atomic(cfg.run_dir() / "eval.json", doc);
            std::cout << (eval_json ? doc.dump(2) + "\n" : result.summary.to_text());
            return result.summary.failed == 0 ? gts::bench::exit_ok : gts::bench::exit_partial;
        }
        if (*ablate) {
            const auto cfg = load_config(ablate_opts);
            const auto report = gts::bench::cmd_ablate(cfg, pick_variants(variants), gts::bench::make_gateway(cfg));
            gts::dataset::write_json_atomic(cfg.runs_root / (cfg.run_id + "-ablation.json"), report.to_json());
            std::cout << report.to_text();
            return gts::bench::exit_ok;
        }
        if (*validate) {
            const auto cfg = load_config(validate_opts);
            const auto problems = gts::bench::validate_dataset(cfg);
            for (const auto& p : problems) std::cout << p << "\n";
            std::cout << (problems.empty() ? "dataset ok\n" : std::to_string(problems.size()) + " problem(s)\n");
            return problems.empty() ? gts::bench::exit_ok : gts::bench::exit_partial;
        }
        if (*conformance) {
            const auto cfg = load_config(conf_opts);
            const auto checks = gts::run_conformance(gts::bench::make_gateway(cfg),
                                                     {"conformance/000000.jpg", "conformance/000001.jpg",
                                                      "conformance/000002.jpg"});
            bool all = true;
            for (const auto& c : checks) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
                          << "\n";
                all = all && c.passed;
            }
            return all ? gts::bench::exit_ok : gts::bench::exit_partial;
        }
    } catch (const gts::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return gts::bench::exit_usage;
    } catch (const gts::LoadError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return gts::bench::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return gts::bench::exit_ok;
}
