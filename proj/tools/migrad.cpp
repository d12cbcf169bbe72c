// Command-line surface: scalar queries (rho-star, sum-capacity), decomposition
// sweeps in CSV/JSON for figure reproduction, and the verification suites.
// Exit codes: 0 success, 1 failed verification, 2 invalid arguments,
// 3 unwritable output path.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "migrad/nf.hpp"
#include "migrad/sk.hpp"
#include "migrad/verify.hpp"

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct SweepRow {
    double gamma;
    double mutual_information;
    double derivative_fd;
    double derivative_reconstructed;
    double mmse_term;
    double interference_term;
    double feedback_term;
    double residual;
};

const std::vector<std::string> kAllColumns = {
    "gamma", "mutual_information", "derivative_fd", "derivative_reconstructed",
    "mmse_term", "interference_term", "feedback_term", "residual"};

double column_value(const SweepRow& r, const std::string& c, double unit) {
    // gamma is dimensionless; everything else is in nats (or bits with --bits)
    if (c == "gamma") return r.gamma;
    if (c == "mutual_information") return r.mutual_information / unit;
    if (c == "derivative_fd") return r.derivative_fd / unit;
    if (c == "derivative_reconstructed") return r.derivative_reconstructed / unit;
    if (c == "mmse_term") return r.mmse_term / unit;
    if (c == "interference_term") return r.interference_term / unit;
    if (c == "feedback_term") return r.feedback_term / unit;
    return r.residual / unit;
}

int run_sweep(const std::string& mode, double power, int n, double sigma2,
              double gamma_min, double gamma_max, int points,
              const std::string& out_path, const std::string& format,
              int figure, bool bits, unsigned threads) {
    std::vector<std::string> columns = kAllColumns;
    std::string effective_mode = mode;
    if (figure == 2) {
        effective_mode = "sk";
        columns = {"gamma", "mutual_information"};
    } else if (figure == 3) {
        effective_mode = "sk";
    } else if (figure == 4) {
        effective_mode = "nf";
    }

    std::vector<double> grid;
    if (gamma_min > 0.0 && gamma_max > gamma_min) {
        for (int i = 0; i < points; ++i)
            grid.push_back(gamma_min +
                           (gamma_max - gamma_min) * i / static_cast<double>(points - 1));
    } else if (effective_mode == "sk") {
        grid = migrad::default_sweep_grid(power, static_cast<std::size_t>(points));
    } else {
        for (int i = 0; i < points; ++i)
            grid.push_back(0.2 + (3.0 - 0.2) * i / static_cast<double>(points - 1));
    }

    std::vector<SweepRow> rows;
    if (effective_mode == "sk") {
        for (const auto& rep : migrad::sk_sweep(power, n, grid, threads))
            rows.push_back({rep.gamma, rep.mutual_information, rep.derivative_fd,
                            rep.derivative_reconstructed, rep.mmse_term,
                            rep.interference_term, rep.feedback_term,
                            rep.derivative_fd - rep.derivative_reconstructed});
    } else {
        for (double g : grid) {
            migrad::NfConfig cfg{sigma2, sigma2, g, g, n};
            auto rep = migrad::nf_exact(cfg);
            rows.push_back({rep.gamma, rep.mutual_information, rep.derivative_fd,
                            rep.derivative_reconstructed, rep.mmse_term,
                            rep.interference_term, rep.feedback_term,
                            rep.derivative_fd - rep.derivative_reconstructed});
        }
    }

    double unit = bits ? std::log(2.0) : 1.0;
    std::ostringstream body;
    if (format == "csv") {
        for (std::size_t c = 0; c < columns.size(); ++c)
            body << (c ? "," : "") << columns[c];
        body << "\n";
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < columns.size(); ++c)
                body << (c ? "," : "") << fmt(column_value(r, columns[c], unit));
            body << "\n";
        }
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json obj;
            for (const auto& c : columns)
                obj[c] = column_value(r, c, unit);
            arr.push_back(obj);
        }
        body << arr.dump(2) << "\n";
    }

    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot open output path: " << out_path << "\n";
            return 3;
        }
        f << body.str();
        if (!f.good()) {
            std::cerr << "error: write failed: " << out_path << "\n";
            return 3;
        }
    }
    return 0;
}

int run_verify(const std::string& suite, bool as_json) {
    auto results = migrad::verify_suite(suite);
    bool all_pass = true;
    if (as_json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : results) {
            nlohmann::ordered_json obj;
            obj["check_id"] = r.id;
            obj["target"] = r.note;
            obj["measured"] = r.measured;
            obj["tolerance"] = r.tolerance;
            obj["pass"] = r.pass;
            obj["informational"] = r.informational;
            arr.push_back(obj);
            if (!r.informational && !r.pass) all_pass = false;
        }
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const auto& r : results) {
            if (r.informational) {
                std::cout << "INFO " << r.id << " measured=" << fmt(r.measured);
                if (!r.note.empty()) std::cout << "  (" << r.note << ")";
                std::cout << "\n";
                continue;
            }
            std::cout << (r.pass ? "PASS " : "FAIL ") << r.id
                      << " measured=" << fmt(r.measured)
                      << " tolerance=" << fmt(r.tolerance) << "\n";
            if (!r.pass) all_pass = false;
        }
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact gradient decompositions of mutual information for "
                 "two-user Gaussian MACs, with a grid-based scalar-channel lab. "
                 "All quantities are in nats unless --bits is given."};
    app.require_subcommand(1);

    double power = 1.0;

    auto* rho_cmd = app.add_subcommand("rho-star",
        "Input correlation equalizing the two sum-capacity bounds");
    rho_cmd->add_option("--power", power, "Per-user power P > 0")->required();

    auto* cap_cmd = app.add_subcommand("sum-capacity",
        "Sum-capacity with feedback, nats per channel use");
    cap_cmd->add_option("--power", power, "Per-user power P > 0")->required();

    std::string mode = "sk", out_path, format = "csv";
    int n = 10, points = 25, figure = 0;
    double gamma_min = 0.0, gamma_max = 0.0, sigma2 = 1.0;
    bool bits = false;
    unsigned threads = 1;
    auto* sweep_cmd = app.add_subcommand("sweep",
        "Decomposition sweep over the steady-state gain gamma");
    sweep_cmd->add_option("--mode", mode, "sk (feedback scheme) or nf (no feedback)")
        ->check(CLI::IsMember({"sk", "nf"}));
    sweep_cmd->add_option("--power", power, "Per-user power P > 0 (sk mode)");
    sweep_cmd->add_option("--n", n, "Channel uses");
    sweep_cmd->add_option("--sigma2", sigma2, "Input variance (nf mode)");
    sweep_cmd->add_option("--gamma-min", gamma_min,
                          "Grid start (default: anchored at the calibrated gain)");
    sweep_cmd->add_option("--gamma-max", gamma_max, "Grid end");
    sweep_cmd->add_option("--points", points, "Grid points")->check(CLI::Range(2, 100000));
    sweep_cmd->add_option("--out", out_path, "Output file (default: stdout)");
    sweep_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--figure", figure,
                          "Column preset: 2 = information vs gamma (sk), "
                          "3 = full sk decomposition, 4 = nf decomposition")
        ->check(CLI::IsMember({2, 3, 4}));
    sweep_cmd->add_flag("--bits", bits, "Report bits instead of nats "
                        "(all columns except gamma; nats/ln 2)");
    sweep_cmd->add_option("--threads", threads, "Worker threads for sweep points");

    std::string suite = "all";
    bool verify_json = false;
    auto* verify_cmd = app.add_subcommand("verify", "Run the self-check suites");
    verify_cmd->add_option("--suite", suite, "all|engine|sk|nf|scalar|mc")
        ->check(CLI::IsMember({"all", "engine", "sk", "nf", "scalar", "mc"}));
    verify_cmd->add_flag("--json", verify_json, "Machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (rho_cmd->parsed()) {
            std::cout << fmt(migrad::solve_rho_star(power)) << "\n";
            return 0;
        }
        if (cap_cmd->parsed()) {
            std::cout << fmt(migrad::sum_capacity(power)) << "\n";
            return 0;
        }
        if (sweep_cmd->parsed())
            return run_sweep(mode, power, n, sigma2, gamma_min, gamma_max, points,
                             out_path, format, figure, bits, threads);
        if (verify_cmd->parsed())
            return run_verify(suite, verify_json);
    } catch (const migrad::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
