#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qkd/cli.hpp"
#include "qkd/errors.hpp"
#include "qkd/io.hpp"

namespace {

using nlohmann::json;

// Values merge as defaults < config file < explicit command-line flags.
json base_config(const std::string& config_path) {
    if (config_path.empty()) {
        return json::object();
    }
    return qkd::io::load_config_file(config_path);
}

bool parse_on_off(const std::string& value, const std::string& flag) {
    if (value == "on") {
        return true;
    }
    if (value == "off") {
        return false;
    }
    throw std::invalid_argument(flag + " must be 'on' or 'off'");
}

int write_or_print(const std::string& out_path, const std::string& payload) {
    if (out_path.empty() || out_path == "-") {
        std::cout << payload;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "i/o error: cannot open '" << out_path << "' for writing\n";
        return 3;
    }
    out << payload;
    return out ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Four-state CV-QKD key-rate analysis, simulation and estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string summary_path;
    std::string scheme;
    std::string sift, alice_error, a_side;
    std::string records_path;
    double alpha = 0.0, beta = 0.0, beta_rec = 0.0, loss = 0.0, eta = 0.0, epsilon = 0.0;
    double distance = 0.0, tail_tolerance = 0.0;
    std::vector<double> epsilons;
    std::uint64_t seed = 0, n_rounds = 0;
    int threads = 0, dim = 0;

    auto* keyrate = app.add_subcommand("keyrate", "Key-rate sweep over distance and noise");
    keyrate->add_option("--config", config_path, "flat JSON config file");
    keyrate->add_option("--out", out_path, "output CSV path (default stdout)");
    keyrate->add_option("--scheme", scheme)->check(CLI::IsMember({"improved", "mixed"}));
    keyrate->add_option("--alpha", alpha);
    keyrate->add_option("--beta", beta);
    keyrate->add_option("--beta-rec", beta_rec);
    keyrate->add_option("--loss-db-per-km", loss);
    keyrate->add_option("--eta", eta, "direct-eta mode: single channel point");
    keyrate->add_option("--epsilon", epsilons, "excess-noise list");
    keyrate->add_option("--sift", sift)->check(CLI::IsMember({"on", "off"}));
    keyrate->add_option("--alice-error", alice_error)->check(CLI::IsMember({"on", "off"}));

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of a P&M scheme");
    simulate->add_option("--config", config_path);
    simulate->add_option("--out", out_path, "records CSV path")->required();
    simulate->add_option("--summary", summary_path, "summary JSON path (default stdout)");
    simulate->add_option("--scheme", scheme)->check(CLI::IsMember({"beamsplitter", "trng"}));
    simulate->add_option("--n", n_rounds, "number of rounds");
    simulate->add_option("--alpha", alpha);
    simulate->add_option("--beta", beta);
    simulate->add_option("--eta", eta);
    simulate->add_option("--distance-km", distance);
    simulate->add_option("--epsilon", epsilon);
    simulate->add_option("--loss-db-per-km", loss);
    simulate->add_option("--seed", seed);
    simulate->add_option("--threads", threads);

    auto* estimate = app.add_subcommand("estimate", "Parameter estimation from records");
    estimate->add_option("records", records_path, "records CSV path");
    estimate->add_option("--config", config_path);
    estimate->add_option("--out", out_path, "output JSON path (default stdout)");
    estimate->add_option("--alpha", alpha);
    estimate->add_option("--beta", beta);
    estimate->add_option("--beta-rec", beta_rec);
    estimate->add_option("--a-side", a_side)->check(CLI::IsMember({"calibrated", "measured"}));

    auto* oracle = app.add_subcommand("oracle", "Closed-form vs Fock-space cross checks");
    oracle->add_option("--config", config_path);
    oracle->add_option("--out", out_path, "output JSON path (default stdout)");
    oracle->add_option("--alpha", alpha);
    oracle->add_option("--beta", beta);
    oracle->add_option("--dim", dim, "Fock truncation dimension");
    oracle->add_option("--tail-tolerance", tail_tolerance);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        json cfg = base_config(config_path);

        if (keyrate->parsed()) {
            if (keyrate->count("--scheme")) cfg["scheme"] = scheme;
            if (keyrate->count("--alpha")) cfg["alpha"] = alpha;
            if (keyrate->count("--beta")) cfg["beta"] = beta;
            if (keyrate->count("--beta-rec")) cfg["beta_rec"] = beta_rec;
            if (keyrate->count("--loss-db-per-km")) cfg["loss_db_per_km"] = loss;
            if (keyrate->count("--eta")) cfg["eta"] = eta;
            if (keyrate->count("--epsilon")) cfg["epsilons"] = epsilons;
            if (keyrate->count("--sift")) cfg["sift"] = parse_on_off(sift, "--sift");
            if (keyrate->count("--alice-error")) {
                cfg["alice_error"] = parse_on_off(alice_error, "--alice-error");
            }
            auto spec = qkd::cli::sweep_from_json(cfg);
            std::ostringstream buffer;
            int code = qkd::cli::cmd_keyrate(spec, buffer, std::cerr);
            if (code != 0) {
                return code;
            }
            return write_or_print(out_path, buffer.str());
        }

        if (simulate->parsed()) {
            if (simulate->count("--scheme")) cfg["scheme"] = scheme;
            if (simulate->count("--n")) cfg["n_rounds"] = n_rounds;
            if (simulate->count("--alpha")) cfg["alpha"] = alpha;
            if (simulate->count("--beta")) cfg["beta"] = beta;
            if (simulate->count("--eta")) cfg["eta"] = eta;
            if (simulate->count("--distance-km")) cfg["distance_km"] = distance;
            if (simulate->count("--epsilon")) cfg["epsilon"] = epsilon;
            if (simulate->count("--loss-db-per-km")) cfg["loss_db_per_km"] = loss;
            if (simulate->count("--seed")) cfg["seed"] = seed;
            if (simulate->count("--threads")) cfg["threads"] = threads;
            auto spec = qkd::cli::simulate_from_json(cfg);
            return qkd::cli::cmd_simulate(spec, out_path, summary_path, std::cerr);
        }

        if (estimate->parsed()) {
            if (estimate->count("records")) cfg["records"] = records_path;
            if (estimate->count("--alpha")) cfg["alpha"] = alpha;
            if (estimate->count("--beta")) cfg["beta"] = beta;
            if (estimate->count("--beta-rec")) cfg["beta_rec"] = beta_rec;
            if (estimate->count("--a-side")) cfg["a_side"] = a_side;
            auto spec = qkd::cli::estimate_from_json(cfg);
            std::ostringstream buffer;
            int code = qkd::cli::cmd_estimate(spec, buffer, std::cerr);
            if (code != 0) {
                return code;
            }
            return write_or_print(out_path, buffer.str());
        }

        if (oracle->parsed()) {
            if (oracle->count("--alpha")) cfg["alpha"] = alpha;
            if (oracle->count("--beta")) cfg["beta"] = beta;
            if (oracle->count("--dim")) cfg["dim"] = dim;
            if (oracle->count("--tail-tolerance")) cfg["tail_tolerance"] = tail_tolerance;
            auto spec = qkd::cli::oracle_from_json(cfg);
            std::ostringstream buffer;
            int code = qkd::cli::cmd_oracle(spec, buffer, std::cerr);
            // The report is useful even when a tolerance fails.
            int io_code = write_or_print(out_path, buffer.str());
            return code != 0 ? code : io_code;
        }
    } catch (const qkd::io::parse_error& e) {
        std::cerr << "file-format error at line " << e.line() << ": " << e.what() << '\n';
        return 3;
    } catch (const qkd::truncation_error& e) {
        std::cerr << "numeric error: " << e.what();
        if (e.suggested_dim() > 0) {
            std::cerr << " (try dim=" << e.suggested_dim() << ")";
        }
        std::cerr << '\n';
        return 2;
    } catch (const qkd::physicality_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
