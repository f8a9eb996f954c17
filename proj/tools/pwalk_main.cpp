// Command-line front end: validate chain specs, compute scaling-limit
// parameters, run the statistical verification battery, and tabulate the
// skew Brownian reference density.
//
// Exit codes: 0 success, 1 verification/validation failure,
//             2 configuration or spec error.

#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pwalk/io.hpp"
#include "pwalk/limit_params.hpp"
#include "pwalk/manifest.hpp"
#include "pwalk/parallel.hpp"
#include "pwalk/sbm.hpp"
#include "pwalk/verify.hpp"

namespace {

using nlohmann::json;

struct ExperimentConfig {
    std::string spec_path;
    std::string mode = "exact";
    long n = 10000;
    long paths = 10000;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware count
    std::string out;
    double alpha = 0.01;
    int cutoff = 512;
    long cycles = 100000;
    long burn_in = 1000;

    json to_json() const {
        return {{"spec", spec_path}, {"mode", mode},       {"n", n},
                {"paths", paths},    {"horizon", horizon}, {"seed", seed},
                {"threads", threads}, {"out", out},        {"alpha", alpha},
                {"cutoff", cutoff},  {"cycles", cycles},   {"burn-in", burn_in}};
    }
};

struct DensityConfig {
    double gamma = 0.0;
    double t = 1.0;
    double x = 0.0;
    double ymin = -8.0;
    double ymax = 8.0;
    long points = 1601;
};

// flags override the config file: apply file values only to options the user
// did not pass on the command line
void apply_config_file(const CLI::App& cmd, ExperimentConfig& cfg, const std::string& path) {
    json j;
    try {
        j = json::parse(pwalk::read_text_file(path));
    } catch (const json::exception& e) {
        throw pwalk::SpecError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    const std::map<std::string, std::function<void(const json&)>> setters{
        {"spec", [&](const json& v) { cfg.spec_path = v.get<std::string>(); }},
        {"mode", [&](const json& v) { cfg.mode = v.get<std::string>(); }},
        {"n", [&](const json& v) { cfg.n = v.get<long>(); }},
        {"paths", [&](const json& v) { cfg.paths = v.get<long>(); }},
        {"horizon", [&](const json& v) { cfg.horizon = v.get<double>(); }},
        {"seed", [&](const json& v) { cfg.seed = v.get<std::uint64_t>(); }},
        {"threads", [&](const json& v) { cfg.threads = v.get<int>(); }},
        {"out", [&](const json& v) { cfg.out = v.get<std::string>(); }},
        {"alpha", [&](const json& v) { cfg.alpha = v.get<double>(); }},
        {"cutoff", [&](const json& v) { cfg.cutoff = v.get<int>(); }},
        {"cycles", [&](const json& v) { cfg.cycles = v.get<long>(); }},
        {"burn-in", [&](const json& v) { cfg.burn_in = v.get<long>(); }},
    };
    const std::map<std::string, std::string> flag_of{
        {"spec", "--spec"},     {"mode", "--mode"},       {"n", "--n"},
        {"paths", "--paths"},   {"horizon", "--horizon"}, {"seed", "--seed"},
        {"threads", "--threads"}, {"out", "--out"},       {"alpha", "--alpha"},
        {"cutoff", "--cutoff"}, {"cycles", "--cycles"},   {"burn-in", "--burn-in"}};
    for (const auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end())
            throw pwalk::SpecError("config file '" + path + "': unknown key '" + key + "'");
        if (cmd.count(flag_of.at(key)) == 0) it->second(value);
    }
}

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--spec", cfg.spec_path, "chain spec JSON file");
    cmd->add_option("--mode", cfg.mode, "exact|mc")->check(CLI::IsMember({"exact", "mc"}));
    cmd->add_option("--n", cfg.n, "scaling index");
    cmd->add_option("--paths", cfg.paths, "ensemble size");
    cmd->add_option("--horizon", cfg.horizon, "time horizon T");
    cmd->add_option("--seed", cfg.seed, "base RNG seed");
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--alpha", cfg.alpha, "statistical test level");
    cmd->add_option("--cutoff", cfg.cutoff, "radius cutoff for exact solves and harvesting");
    cmd->add_option("--cycles", cfg.cycles, "Monte Carlo cycle count");
    cmd->add_option("--burn-in", cfg.burn_in, "cycles discarded per replica");
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
}

void validate_experiment(const ExperimentConfig& cfg, bool needs_spec) {
    if (needs_spec && cfg.spec_path.empty()) throw pwalk::SpecError("--spec is required");
    if (cfg.n < 1) throw pwalk::SpecError("n must be >= 1");
    if (cfg.paths < 1) throw pwalk::SpecError("paths must be >= 1");
    if (!(cfg.horizon > 0)) throw pwalk::SpecError("horizon must be > 0");
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw pwalk::SpecError("alpha must be in (0,1)");
    if (cfg.cutoff < 2) throw pwalk::SpecError("cutoff must be >= 2");
    if (cfg.cycles < 1) throw pwalk::SpecError("cycles must be >= 1");
}

int effective_threads(const ExperimentConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : pwalk::hardware_threads();
}

pwalk::ParamOptions param_options(const ExperimentConfig& cfg) {
    pwalk::ParamOptions opt;
    opt.mode = cfg.mode == "mc" ? pwalk::Mode::MonteCarlo : pwalk::Mode::Exact;
    opt.radius_cutoff = cfg.cutoff;
    opt.harvest.cycles = cfg.cycles;
    opt.harvest.burn_in = cfg.burn_in;
    opt.harvest.seed = cfg.seed;
    opt.harvest.threads = effective_threads(cfg);
    return opt;
}

pwalk::VerifyOptions verify_options(const ExperimentConfig& cfg) {
    pwalk::VerifyOptions opt;
    opt.n = cfg.n;
    opt.paths = cfg.paths;
    opt.horizon = cfg.horizon;
    opt.alpha = cfg.alpha;
    opt.seed = cfg.seed;
    opt.threads = effective_threads(cfg);
    opt.radius_cutoff = cfg.cutoff;
    opt.mc_cycles = cfg.cycles;
    opt.burn_in = cfg.burn_in;
    return opt;
}

void maybe_write_outputs(const ExperimentConfig& cfg, const std::string& command,
                         const std::string& spec_content,
                         const std::map<std::string, std::string>& files) {
    if (cfg.out.empty()) return;
    for (const auto& [name, content] : files) pwalk::write_text_file(cfg.out + "/" + name, content);
    pwalk::write_manifest(cfg.out, command, cfg.to_json(), cfg.spec_path, spec_content);
}

int cmd_validate(const ExperimentConfig& cfg) {
    std::string content = pwalk::read_text_file(cfg.spec_path);
    pwalk::ChainSpecVariant spec = pwalk::load_chain_spec(cfg.spec_path);
    pwalk::ValidationReport report =
        std::visit([](const auto& s) { return s.validate(); }, spec);
    json checks = json::array();
    for (const auto& c : report.checks) {
        std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.empty() ? "" : ": ", c.detail.c_str());
        checks.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    maybe_write_outputs(cfg, "validate", content, {{"validate.json", checks.dump(2) + "\n"}});
    return report.all_pass() ? 0 : 1;
}

int cmd_params(const ExperimentConfig& cfg) {
    std::string content = pwalk::read_text_file(cfg.spec_path);
    pwalk::ChainSpecVariant spec = pwalk::load_chain_spec(cfg.spec_path);
    pwalk::LimitParams params = std::visit(
        [&](const auto& s) { return pwalk::compute_params(s, param_options(cfg)); }, spec);
    std::string text = params.to_json().dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (params.truncation_loss > 1e-6)
        std::fprintf(stderr,
                     "warning: truncation loss %.3g exceeds 1e-6; consider a larger --cutoff\n",
                     params.truncation_loss);
    maybe_write_outputs(cfg, "params", content, {{"params.json", text}});
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    std::string content = pwalk::read_text_file(cfg.spec_path);
    pwalk::ChainSpecVariant spec = pwalk::load_chain_spec(cfg.spec_path);
    pwalk::VerifyOptions opt = verify_options(cfg);
    pwalk::VerifyReport report = std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, pwalk::AxisChainSpec>)
                return pwalk::verify_axis(s, opt);
            else if constexpr (std::is_same_v<T, pwalk::MembraneWalkSpec>)
                return pwalk::verify_membrane(s, opt);
            else
                return pwalk::verify_spider(s, opt);
        },
        spec);
    for (const auto& r : report.records)
        std::printf("[%s] %s (statistic=%.6g threshold=%.6g N=%ld n=%ld)\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.statistic, r.threshold, r.paths,
                    r.n);
    maybe_write_outputs(cfg, "verify", content,
                        {{"verify.json", report.to_json().dump(2) + "\n"}});
    return report.all_pass() ? 0 : 1;
}

int cmd_density(const ExperimentConfig& cfg, const DensityConfig& dc) {
    if (dc.points < 2) throw pwalk::SpecError("density: need at least 2 grid points");
    if (!(dc.ymax > dc.ymin)) throw pwalk::SpecError("density: ymax must exceed ymin");
    pwalk::SbmParams p(dc.gamma, dc.t, dc.x);
    std::string csv = "y,pdf,cdf\n";
    for (long i = 0; i < dc.points; ++i) {
        double y = dc.ymin + (dc.ymax - dc.ymin) * static_cast<double>(i) /
                                 static_cast<double>(dc.points - 1);
        char line[96];
        std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", y, pwalk::sbm_density(p, y),
                      pwalk::sbm_cdf(p, y));
        csv += line;
    }
    std::fputs(csv.c_str(), stdout);
    if (!cfg.out.empty()) {
        json dcfg{{"gamma", dc.gamma}, {"t", dc.t},           {"x", dc.x},
                  {"ymin", dc.ymin},   {"ymax", dc.ymax},     {"points", dc.points}};
        pwalk::write_text_file(cfg.out + "/density.csv", csv);
        pwalk::write_manifest(cfg.out, "density", dcfg, "(parameters)", dcfg.dump());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perturbed random walk scaling-limit toolkit"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_path;
    DensityConfig dc;

    CLI::App* validate = app.add_subcommand("validate", "run all assumption checks on a spec");
    CLI::App* params = app.add_subcommand("params", "compute mu, weights, gamma for a spec");
    CLI::App* verify = app.add_subcommand("verify", "run the statistical verification battery");
    CLI::App* density = app.add_subcommand("density", "tabulate the skew BM density and cdf");
    for (CLI::App* cmd : {validate, params, verify, density})
        add_common_options(cmd, cfg, config_path);
    density->add_option("--gamma", dc.gamma, "permeability in [-1,1]");
    density->add_option("--t", dc.t, "time");
    density->add_option("--x", dc.x, "start point");
    density->add_option("--ymin", dc.ymin, "grid lower end");
    density->add_option("--ymax", dc.ymax, "grid upper end");
    density->add_option("--points", dc.points, "grid size");

    CLI11_PARSE(app, argc, argv);
    CLI::App* cmd = app.get_subcommands().front();

    try {
        if (!config_path.empty()) apply_config_file(*cmd, cfg, config_path);
        validate_experiment(cfg, cmd != density);
        if (cmd == validate) return cmd_validate(cfg);
        if (cmd == params) return cmd_params(cfg);
        if (cmd == verify) return cmd_verify(cfg);
        return cmd_density(cfg, dc);
    } catch (const pwalk::ConsistencyError& e) {
        std::fprintf(stderr, "consistency failure: %s\n", e.what());
        return 1;
    } catch (const pwalk::BudgetError& e) {
        std::fprintf(stderr, "budget error: %s\n", e.what());
        return 2;
    } catch (const pwalk::SpecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
