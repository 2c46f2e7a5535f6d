// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pigen_sqd.cpp
 * @brief Command-line driver: run, fci, mp2, sample, support, report.
 *
 * Exit codes: 0 success, 2 configuration error, 3 I/O or malformed input,
 * 4 numerical failure, 5 non-convergence.
 */

#include "pigen/pigen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace pigen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitNonConvergence = 5;

int exit_code(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io:
    case ErrorKind::Format: return kExitIo;
    case ErrorKind::Numerical: return kExitNumerical;
    case ErrorKind::Convergence: return kExitNonConvergence;
    }
    return kExitNumerical;
}

/// Options shared by every subcommand that needs a RunConfig. Precedence:
/// built-in defaults < --config file < --set overrides < dedicated flags.
struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    std::vector<std::pair<std::string, std::string>> flags;  // key, value as given

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_file, "flat key = value configuration file");
        app->add_option("--set", overrides, "override one key: --set key=value (repeatable)");
        flag(app, "--fcidump", "fcidump", "FCIDUMP integral file");
        flag(app, "--seed", "seed", "master random seed");
        flag(app, "--n-alpha", "n_alpha", "alpha electrons (default: FCIDUMP header)");
        flag(app, "--n-beta", "n_beta", "beta electrons (default: FCIDUMP header)");
        flag(app, "--eps-int", "eps_int", "integral / amplitude pruning threshold");
        flag(app, "--n-max", "n_max", "highest perturbative excitation rank (2-4)");
        flag(app, "--shots", "shots", "simulated shots");
        flag(app, "--bitflip", "bitflip_p", "simulated per-bit flip probability");
        flag(app, "--reference-energy", "reference_energy", "reference total energy for error columns");
    }

    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            name, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
    }

    [[nodiscard]] RunConfig resolve() const {
        RunConfig cfg = config_file.empty() ? RunConfig{} : read_config_file(config_file);
        for (const auto& o : overrides) apply_override(cfg, o);
        for (const auto& [k, v] : flags) set_config_value(cfg, k, v);
        return cfg;
    }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw IoError("cannot write '" + path.string() + "'");
}

std::string counts_text(const Counts& k) {
    std::ostringstream os;
    save_counts(os, k);
    return os.str();
}

int cmd_run(const CommonOptions& opt, const std::string& out_flag, const std::string& counts_flag) {
    RunConfig cfg = opt.resolve();
    if (!out_flag.empty()) cfg.output_dir = out_flag;
    if (!counts_flag.empty()) {
        cfg.source = SampleSource::Counts;
        cfg.counts_path = counts_flag;
    }
    cfg.validate();
    const auto result = run_pipeline(cfg);

    // Render everything before touching the output directory so a failed
    // run leaves no partial artifacts.
    std::ostringstream report, cycles, coeffs, config;
    write_report_json(report, result, cfg);
    write_cycles_csv(cycles, result.report);
    write_coeffs_csv(coeffs, result.report, result.basis);
    serialize_config(config, cfg);
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file(dir / "report.json", report.str());
    write_file(dir / "cycles.csv", cycles.str());
    write_file(dir / "coeffs.csv", coeffs.str());
    write_file(dir / "counts.txt", counts_text(result.counts));
    write_file(dir / "config.txt", config.str());

    const auto& rep = result.report;
    std::cout.precision(12);
    std::cout << "final_energy " << rep.energy << "\n"
              << "macro_cycles " << rep.cycles.size() << "\n"
              << "n_det " << rep.determinants.size() << "\n"
              << "search_space " << rep.search_size << "\n"
              << "stop_reason " << to_string(rep.stop) << "\n";
    if (rep.reference_energy) std::cout << "error_vs_reference " << rep.energy - *rep.reference_energy << "\n";
    if (!rep.converged) {
        std::cerr << "pigen_sqd: recovery loop reached max_macro = " << cfg.max_macro << " without converging\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_fci(const CommonOptions& opt, std::uint64_t cap, const std::string& out) {
    const RunConfig cfg = opt.resolve();
    const auto s = read_fcidump(cfg.fcidump);
    const auto basis = resolve_basis(s, cfg);
    const auto dim = symmetry_space_dimension(basis);
    if (dim > cap)
        throw ConfigError("symmetry-space dimension " + std::to_string(dim) + " exceeds --cap " + std::to_string(cap));
    const auto fci = dense_fci_oracle(basis, s, cap);
    std::cout.precision(15);
    std::cout << "fci_energy " << fci.energy << "\n" << "dimension " << fci.determinants.size() << "\n";
    if (!out.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "# bitstring coefficient (blocked layout), energy " << fci.energy << "\n";
        for (std::size_t i = 0; i < fci.determinants.size(); ++i)
            os << to_bitstring(fci.determinants[i], basis.n_spatial) << ' '
               << fci.state.coefficients(static_cast<Eigen::Index>(i)) << '\n';
        write_file(out, os.str());
    }
    return kExitOk;
}

int cmd_mp2(const CommonOptions& opt) {
    const RunConfig cfg = opt.resolve();
    const auto s = read_fcidump(cfg.fcidump);
    const auto basis = resolve_basis(s, cfg);
    const auto t = mp2_amplitudes(s, basis, cfg.eps_int);
    std::cout.precision(15);
    std::cout << "mp2_correlation_energy " << mp2_energy(t, s) << "\n" << "amplitudes " << t.size() << "\n";
    return kExitOk;
}

int cmd_sample(const CommonOptions& opt, const std::string& out) {
    RunConfig cfg = opt.resolve();
    cfg.source = SampleSource::Simulate;
    cfg.validate();
    const auto s = read_fcidump(cfg.fcidump);
    const auto basis = resolve_basis(s, cfg);
    const auto support = perturbative_support(s, basis, cfg.eps_int, cfg.n_max, cfg.join_policy);
    const auto counts = simulate_counts(s, basis, cfg, support);
    const std::string text = counts_text(counts);
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_file(out, text);
    std::cerr << "pigen_sqd: " << counts.n_shots() << " shots, " << counts.entries.size() << " distinct bitstrings\n";
    return kExitOk;
}

int cmd_support(const CommonOptions& opt, const std::string& out) {
    const RunConfig cfg = opt.resolve();
    cfg.validate();
    const auto s = read_fcidump(cfg.fcidump);
    const auto basis = resolve_basis(s, cfg);
    const auto screen = perturbative_screen(s, basis, cfg.eps_int, cfg.n_max, cfg.join_policy);
    const auto ref = reference_determinant(basis);
    std::ostringstream os;
    os << "# bitstring excitation_rank\n";
    for (const auto& d : screen.configurations)
        os << to_bitstring(d, basis.n_spatial) << ' ' << excitation_rank(d, ref) << '\n';
    if (!out.empty()) write_file(out, os.str());
    std::cout << "configurations " << screen.configurations.size() << "\n";
    for (int r = 0; r <= 4; ++r) std::cout << "rank_" << r << ' ' << screen.rank_counts[static_cast<std::size_t>(r)] << "\n";
    std::cout << "scatterers " << screen.cost.n_scatterers << "\n"
              << "doubles " << screen.cost.n_doubles << "\n"
              << "triples_join_ops " << screen.cost.counters.triples_join_ops << "\n"
              << "quadruples_join_ops " << screen.cost.counters.quadruples_join_ops << "\n";
    if (out.empty()) std::cout << os.str();
    return kExitOk;
}

int cmd_report(const std::string& dir) {
    const fs::path path = fs::path(dir) / "report.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed report.json: " + std::string(e.what()));
    }
    std::cout.precision(12);
    std::cout << "final_energy      " << j.value("final_energy", 0.0) << "\n"
              << "converged         " << j.value("converged", false) << " (" << j.value("stop_reason", "") << ")\n"
              << "macro_cycles      " << j.value("macro_cycles", 0) << "\n"
              << "n_det / d_Q       " << j.value("n_det", 0) << " / " << j.value("symmetry_space_dimension", 0) << "\n"
              << "search_space      " << j.value("search_space_size", 0) << "\n";
    if (j.contains("error_vs_reference")) std::cout << "error_vs_reference " << j["error_vs_reference"].get<double>() << "\n";
    const fs::path cycles = fs::path(dir) / "cycles.csv";
    if (std::ifstream c(cycles); c) std::cout << "\n" << c.rdbuf();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PIGen-SQD: perturbation-informed generative configuration recovery"};
    app.require_subcommand(1);

    CommonOptions run_opt, fci_opt, mp2_opt, sample_opt, support_opt;
    std::string run_out, run_counts, fci_out, sample_out, support_out, report_dir;
    std::uint64_t fci_cap = 20000;

    auto* run = app.add_subcommand("run", "sample/ingest, filter, perturbative support, recovery loop");
    run_opt.attach(run);
    run->add_option("-o,--out", run_out, "output directory (overrides output_dir)");
    run->add_option("--counts", run_counts, "ingest a counts file instead of simulating");

    auto* fci = app.add_subcommand("fci", "exact ground state over the symmetry space");
    fci_opt.attach(fci);
    fci->add_option("--cap", fci_cap, "largest symmetry-space dimension accepted");
    fci->add_option("-o,--out", fci_out, "write 'bitstring coefficient' lines");

    auto* mp2 = app.add_subcommand("mp2", "MP2 correlation energy and amplitude count");
    mp2_opt.attach(mp2);

    auto* sample = app.add_subcommand("sample", "simulate measurement counts");
    sample_opt.attach(sample);
    sample->add_option("-o,--out", sample_out, "counts file (default: stdout)");

    auto* support = app.add_subcommand("support", "perturbative configuration support");
    support_opt.attach(support);
    support->add_option("-o,--out", support_out, "write the configuration listing here");

    auto* report = app.add_subcommand("report", "summarize a run directory");
    report->add_option("dir", report_dir, "directory written by 'run'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_opt, run_out, run_counts);
        if (*fci) return cmd_fci(fci_opt, fci_cap, fci_out);
        if (*mp2) return cmd_mp2(mp2_opt);
        if (*sample) return cmd_sample(sample_opt, sample_out);
        if (*support) return cmd_support(support_opt, support_out);
        if (*report) return cmd_report(report_dir);
    } catch (const Error& e) {
        std::cerr << "pigen_sqd: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "pigen_sqd: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
