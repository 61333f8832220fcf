#include "qkd/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "qkd/channel.hpp"
#include "qkd/errors.hpp"
#include "qkd/io.hpp"
#include "qkd/oracle.hpp"

namespace qkd::cli {

namespace {

using nlohmann::json;

void require_increasing(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) {
        throw std::invalid_argument(std::string(name) + " grid must be nonempty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
        }
    }
}

security::Scheme parse_rate_scheme(const std::string& name) {
    if (name == "improved") {
        return security::Scheme::Improved;
    }
    if (name == "mixed") {
        return security::Scheme::Mixed;
    }
    throw std::invalid_argument("scheme must be 'improved' or 'mixed', got '" + name + "'");
}

montecarlo::SimScheme parse_sim_scheme(const std::string& name) {
    if (name == "beamsplitter") {
        return montecarlo::SimScheme::Beamsplitter;
    }
    if (name == "trng") {
        return montecarlo::SimScheme::Trng;
    }
    throw std::invalid_argument("scheme must be 'beamsplitter' or 'trng', got '" + name + "'");
}

double get_num(const json& cfg, const char* key, double fallback) {
    if (!cfg.contains(key)) {
        return fallback;
    }
    if (!cfg.at(key).is_number()) {
        throw std::invalid_argument(std::string("config field '") + key + "' must be numeric");
    }
    return cfg.at(key).get<double>();
}

bool get_bool(const json& cfg, const char* key, bool fallback) {
    if (!cfg.contains(key)) {
        return fallback;
    }
    if (!cfg.at(key).is_boolean()) {
        throw std::invalid_argument(std::string("config field '") + key + "' must be boolean");
    }
    return cfg.at(key).get<bool>();
}

std::string get_str(const json& cfg, const char* key, const std::string& fallback) {
    if (!cfg.contains(key)) {
        return fallback;
    }
    if (!cfg.at(key).is_string()) {
        throw std::invalid_argument(std::string("config field '") + key + "' must be a string");
    }
    return cfg.at(key).get<std::string>();
}

} // namespace

void SweepSpec::validate() const {
    if (!eta) {
        require_increasing(distances_km, "distance");
    } else if (!(*eta > 0.0) || *eta > 1.0) {
        throw std::invalid_argument("eta must lie in (0, 1]");
    }
    require_increasing(epsilons, "epsilon");
    protocol::ModulationParams{alpha, beta}.validate();
    security::ReconciliationConfig{beta_rec}.validate();
    if (!(loss_db_per_km > 0.0)) {
        throw std::invalid_argument("loss_db_per_km must be > 0");
    }
}

SweepSpec default_sweep_spec() {
    SweepSpec spec;
    spec.distances_km.reserve(101);
    for (int d = 0; d <= 100; ++d) {
        spec.distances_km.push_back(static_cast<double>(d));
    }
    spec.epsilons = {0.002, 0.004, 0.006, 0.008, 0.01};
    return spec;
}

std::vector<security::KeyRateReport> run_sweep(const SweepSpec& spec) {
    spec.validate();
    security::KeyRateOptions opts;
    opts.scheme = spec.scheme;
    opts.include_alice_error = spec.alice_error;
    opts.half_sifting_factor = spec.sift;
    security::ReconciliationConfig rec{spec.beta_rec};
    protocol::ModulationParams mod{spec.alpha, spec.beta};

    std::vector<double> etas;
    if (spec.eta) {
        etas.push_back(*spec.eta);
    } else {
        etas.reserve(spec.distances_km.size());
        for (double d : spec.distances_km) {
            etas.push_back(channel::distance_to_eta(d, spec.loss_db_per_km));
        }
    }

    std::vector<security::KeyRateReport> rows;
    rows.reserve(etas.size() * spec.epsilons.size());
    for (double epsilon : spec.epsilons) {
        for (double eta : etas) {
            channel::ChannelParams ch{eta, epsilon, spec.loss_db_per_km};
            rows.push_back(security::key_rate(mod, ch, rec, opts));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<security::KeyRateReport>& rows) {
    out << "# scheme=" << (spec.scheme == security::Scheme::Improved ? "improved" : "mixed")
        << " alpha=" << io::format_g12(spec.alpha) << " beta=" << io::format_g12(spec.beta)
        << " beta_rec=" << io::format_g12(spec.beta_rec)
        << " loss_db_per_km=" << io::format_g12(spec.loss_db_per_km)
        << " sift=" << (spec.sift ? "on" : "off")
        << " alice_error=" << (spec.alice_error ? "on" : "off") << '\n';
    io::write_key_rate_header(out);
    for (const auto& row : rows) {
        io::write_key_rate_row(out, row);
    }
}

double cutoff_distance(const std::vector<security::KeyRateReport>& curve) {
    for (const auto& row : curve) {
        if (row.k_rate <= 0.0) {
            return row.distance_km;
        }
    }
    return std::numeric_limits<double>::infinity();
}

SweepSpec sweep_from_json(const json& cfg) {
    SweepSpec spec = default_sweep_spec();
    if (cfg.contains("distances_km")) {
        spec.distances_km = cfg.at("distances_km").get<std::vector<double>>();
    } else if (cfg.contains("distance_min_km") || cfg.contains("distance_max_km") ||
               cfg.contains("distance_step_km")) {
        double lo = get_num(cfg, "distance_min_km", 0.0);
        double hi = get_num(cfg, "distance_max_km", 100.0);
        double step = get_num(cfg, "distance_step_km", 1.0);
        if (!(step > 0.0) || hi < lo) {
            throw std::invalid_argument("bad distance grid bounds");
        }
        spec.distances_km.clear();
        for (double d = lo; d <= hi + 1e-9; d += step) {
            spec.distances_km.push_back(d);
        }
    }
    if (cfg.contains("epsilons")) {
        spec.epsilons = cfg.at("epsilons").get<std::vector<double>>();
    }
    spec.alpha = get_num(cfg, "alpha", spec.alpha);
    spec.beta = get_num(cfg, "beta", spec.beta);
    spec.beta_rec = get_num(cfg, "beta_rec", spec.beta_rec);
    spec.loss_db_per_km = get_num(cfg, "loss_db_per_km", spec.loss_db_per_km);
    if (cfg.contains("eta")) {
        spec.eta = get_num(cfg, "eta", 1.0);
    }
    spec.scheme = parse_rate_scheme(get_str(cfg, "scheme", "improved"));
    spec.sift = get_bool(cfg, "sift", spec.sift);
    spec.alice_error = get_bool(cfg, "alice_error", spec.alice_error);
    spec.validate();
    return spec;
}

SimulateSpec simulate_from_json(const json& cfg) {
    SimulateSpec spec;
    spec.run.scheme = parse_sim_scheme(get_str(cfg, "scheme", "beamsplitter"));
    double n = get_num(cfg, "n_rounds", 0.0);
    if (!(n >= 1.0)) {
        throw std::invalid_argument("n_rounds must be >= 1");
    }
    spec.run.n_rounds = static_cast<std::uint64_t>(n);
    spec.run.mod.alpha = get_num(cfg, "alpha", 0.5);
    spec.run.mod.beta = get_num(cfg, "beta", 20.0);
    spec.run.ch.loss_db_per_km = get_num(cfg, "loss_db_per_km", 0.2);
    if (cfg.contains("eta") && cfg.contains("distance_km")) {
        throw std::invalid_argument("give either eta or distance_km, not both");
    }
    if (cfg.contains("distance_km")) {
        spec.distance_km = get_num(cfg, "distance_km", 0.0);
        spec.run.ch.eta = channel::distance_to_eta(spec.distance_km, spec.run.ch.loss_db_per_km);
    } else {
        spec.run.ch.eta = get_num(cfg, "eta", 1.0);
    }
    spec.run.ch.epsilon = get_num(cfg, "epsilon", 0.0);
    spec.run.seed = static_cast<std::uint64_t>(get_num(cfg, "seed", 0.0));
    spec.threads = static_cast<int>(get_num(cfg, "threads", 1.0));
    if (spec.threads < 1 || spec.threads > 256) {
        throw std::invalid_argument("threads must lie in [1, 256]");
    }
    spec.run.validate();
    return spec;
}

EstimateSpec estimate_from_json(const json& cfg) {
    EstimateSpec spec;
    spec.records_path = get_str(cfg, "records", "");
    if (spec.records_path.empty()) {
        throw std::invalid_argument("estimate needs a records file");
    }
    spec.mod.alpha = get_num(cfg, "alpha", 0.5);
    spec.mod.beta = get_num(cfg, "beta", 20.0);
    spec.rec.beta_rec = get_num(cfg, "beta_rec", 0.8);
    std::string a_side = get_str(cfg, "a_side", "calibrated");
    if (a_side == "calibrated") {
        spec.a_side = estimation::ASide::Calibrated;
    } else if (a_side == "measured") {
        spec.a_side = estimation::ASide::Measured;
    } else {
        throw std::invalid_argument("a_side must be 'calibrated' or 'measured'");
    }
    spec.mod.validate();
    spec.rec.validate();
    return spec;
}

OracleSpec oracle_from_json(const json& cfg) {
    OracleSpec spec;
    spec.alpha = get_num(cfg, "alpha", 0.5);
    spec.beta = get_num(cfg, "beta", 1.0);
    spec.trunc.dim = static_cast<int>(get_num(cfg, "dim", default_trunc_dim()));
    spec.trunc.tail_tolerance = get_num(cfg, "tail_tolerance", 1e-10);
    if (!(spec.alpha >= 0.0) || spec.alpha > 2.0 || !(spec.beta > 0.0) || spec.beta > 2.0) {
        throw std::invalid_argument(
            "oracle checks run for alpha in [0, 2] and beta in (0, 2]");
    }
    spec.trunc.validate();
    return spec;
}

int default_trunc_dim() {
    if (const char* env = std::getenv("QKD_DEFAULT_TRUNC_DIM")) {
        char* end = nullptr;
        long value = std::strtol(env, &end, 10);
        if (end && *end == '\0' && value >= 2 && value <= (1 << 14)) {
            return static_cast<int>(value);
        }
        throw std::invalid_argument("QKD_DEFAULT_TRUNC_DIM must be an integer >= 2");
    }
    return fock::TruncationConfig{}.dim;
}

int cmd_keyrate(const SweepSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        auto rows = run_sweep(spec);
        write_sweep_csv(out, spec, rows);
        return 0;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const physicality_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_simulate(const SimulateSpec& spec, const std::string& out_path,
                 const std::string& summary_path, std::ostream& err) {
    try {
        std::ofstream records(out_path, std::ios::binary);
        if (!records) {
            err << "i/o error: cannot open '" << out_path << "' for writing\n";
            return 3;
        }
        records << "# scheme="
                << (spec.run.scheme == montecarlo::SimScheme::Beamsplitter ? "beamsplitter"
                                                                           : "trng")
                << " n_rounds=" << spec.run.n_rounds
                << " alpha=" << io::format_g12(spec.run.mod.alpha)
                << " beta=" << io::format_g12(spec.run.mod.beta)
                << " eta=" << io::format_g12(spec.run.ch.eta)
                << " epsilon=" << io::format_g12(spec.run.ch.epsilon)
                << " seed=" << spec.run.seed << '\n';
        io::write_record_header(records);
        auto summary = montecarlo::run(
            spec.run,
            [&](const montecarlo::TrialRecord& rec) { io::write_record(records, rec); },
            spec.threads);
        records.flush();
        if (!records) {
            err << "i/o error: failed while writing '" << out_path << "'\n";
            return 3;
        }

        nlohmann::json doc = io::summary_to_json(summary);
        doc["scheme"] =
            spec.run.scheme == montecarlo::SimScheme::Beamsplitter ? "beamsplitter" : "trng";
        doc["seed"] = spec.run.seed;
        doc["alpha"] = io::round_g12(spec.run.mod.alpha);
        doc["beta"] = io::round_g12(spec.run.mod.beta);
        doc["eta"] = io::round_g12(spec.run.ch.eta);
        doc["epsilon"] = io::round_g12(spec.run.ch.epsilon);
        if (summary_path.empty() || summary_path == "-") {
            std::cout << doc.dump(2) << '\n';
        } else {
            std::ofstream summary_file(summary_path, std::ios::binary);
            if (!summary_file) {
                err << "i/o error: cannot open '" << summary_path << "' for writing\n";
                return 3;
            }
            summary_file << doc.dump(2) << '\n';
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_estimate(const EstimateSpec& spec, std::ostream& out, std::ostream& err) {
    estimation::MomentAccumulator acc;
    try {
        std::ifstream in(spec.records_path, std::ios::binary);
        if (!in) {
            err << "i/o error: cannot open '" << spec.records_path << "'\n";
            return 3;
        }
        io::read_records(in, [&](const montecarlo::TrialRecord& rec) { acc.add(rec); });
    } catch (const io::parse_error& e) {
        err << "file-format error at line " << e.line() << ": " << e.what() << '\n';
        return 3;
    }

    try {
        auto cov = estimation::estimate_covariance(acc, spec.mod);
        nlohmann::json doc;
        doc["covariance"] = io::covariance_to_json(cov);
        try {
            auto ch = estimation::estimate_channel(cov, spec.mod);
            doc["channel"] = io::channel_estimate_to_json(ch);
        } catch (const degenerate_estimate_error& e) {
            doc["channel"] = {{"error", e.what()}};
        }
        auto rate = estimation::key_rate_from_data(acc, spec.mod, spec.rec, spec.a_side);
        doc["empirical_ber"] = io::round_g12(rate.empirical_ber);
        doc["key_rate"] = {{"point", io::key_rate_to_json(rate.point)},
                           {"conservative", io::key_rate_to_json(rate.conservative)},
                           {"clamped_to_physical", rate.clamped_to_physical},
                           {"a_side", spec.a_side == estimation::ASide::Calibrated
                                          ? "calibrated"
                                          : "measured"}};
        out << doc.dump(2) << '\n';
        return 0;
    } catch (const insufficient_data_error& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const physicality_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_oracle(const OracleSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        auto report = oracle::run_checks(spec.alpha, spec.beta, spec.trunc);
        out << io::oracle_report_to_json(report).dump(2) << '\n';
        if (!report.pass()) {
            err << "numeric error: oracle deviation " << io::format_g12(report.max_deviation())
                << " exceeds 1e-7\n";
            return 2;
        }
        return 0;
    } catch (const truncation_error& e) {
        err << "numeric error: " << e.what();
        if (e.suggested_dim() > 0) {
            err << " (try dim=" << e.suggested_dim() << ")";
        }
        err << '\n';
        return 2;
    }
}

} // namespace qkd::cli
