#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qkd/cli.hpp"
#include "qkd/io.hpp"
#include "qkd/security.hpp"
#include "test_support.hpp"

using namespace qkd;
using nlohmann::json;

namespace {

std::filesystem::path tmp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("cvqkd_test_" + name);
}

} // namespace

TEST_CASE("default sweep covers the full grid") {
    auto spec = cli::default_sweep_spec();
    auto rows = cli::run_sweep(spec);
    CHECK(rows.size() == 505);

    std::ostringstream out;
    cli::write_sweep_csv(out, spec, rows);
    std::istringstream in(out.str());
    std::string line;
    std::size_t data_rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            CHECK(line == io::kKeyRateCsvHeader);
            header_seen = true;
            continue;
        }
        ++data_rows;
    }
    CHECK(data_rows == 505);
}

TEST_CASE("single-point sweep in direct-eta mode") {
    cli::SweepSpec spec = cli::default_sweep_spec();
    spec.eta = 1.0;
    spec.epsilons = {0.0};
    spec.beta_rec = 0.8;
    auto rows = cli::run_sweep(spec);
    REQUIRE(rows.size() == 1);
    double i_ab = 1.0 - security::binary_entropy(security::analytic_ber(0.5, 20.0, {1.0, 0.0}));
    CHECK(rows[0].k_rate == doctest::Approx(0.8 * i_ab).epsilon(1e-9));
}

TEST_CASE("sweep validation rejects bad grids") {
    cli::SweepSpec spec = cli::default_sweep_spec();
    spec.distances_km.clear();
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = cli::default_sweep_spec();
    spec.epsilons = {0.01, 0.002};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("sweep config parsing and overrides") {
    json cfg = {{"distance_min_km", 0.0},
                {"distance_max_km", 10.0},
                {"distance_step_km", 5.0},
                {"epsilons", {0.004}},
                {"alpha", 0.4},
                {"scheme", "mixed"},
                {"sift", true}};
    auto spec = cli::sweep_from_json(cfg);
    CHECK(spec.distances_km.size() == 3);
    CHECK(spec.epsilons.size() == 1);
    CHECK(spec.alpha == 0.4);
    CHECK(spec.scheme == security::Scheme::Mixed);
    CHECK(spec.sift);

    json bad = cfg;
    bad["scheme"] = "bogus";
    CHECK_THROWS_AS(cli::sweep_from_json(bad), std::invalid_argument);
}

TEST_CASE("simulate config validation") {
    json cfg = {{"n_rounds", 0}};
    CHECK_THROWS_AS(cli::simulate_from_json(cfg), std::invalid_argument);
    json both = {{"n_rounds", 10}, {"eta", 0.5}, {"distance_km", 10.0}};
    CHECK_THROWS_AS(cli::simulate_from_json(both), std::invalid_argument);
    json good = {{"n_rounds", 10}, {"distance_km", 50.0}, {"seed", 3}};
    auto spec = cli::simulate_from_json(good);
    CHECK(spec.run.ch.eta == doctest::Approx(0.1));
}

TEST_CASE("oracle command flags failures and suggests a dimension") {
    cli::OracleSpec spec;
    spec.alpha = 0.5;
    spec.beta = 2.0;
    spec.trunc = {16, 1e-10};
    std::ostringstream out, err;
    int code = cli::cmd_oracle(spec, out, err);
    CHECK(code == 2);
    CHECK(err.str().find("try dim=") != std::string::npos);

    spec.trunc = {64, 1e-10};
    std::ostringstream out2, err2;
    CHECK(cli::cmd_oracle(spec, out2, err2) == 0);
    auto doc = json::parse(out2.str());
    CHECK(doc.at("pass").get<bool>());

    // Zero signal amplitude reports the trivial spectrum and succeeds.
    json zero_cfg = {{"alpha", 0.0}, {"beta", 1.0}, {"dim", 32}};
    auto zero_spec = cli::oracle_from_json(zero_cfg);
    std::ostringstream out3, err3;
    CHECK(cli::cmd_oracle(zero_spec, out3, err3) == 0);
    auto zero_doc = json::parse(out3.str());
    CHECK(zero_doc.at("spectrum_dev").get<double>() < 1e-10);
}

TEST_CASE("record CSV round trip and parse errors") {
    montecarlo::RunConfig cfg;
    cfg.n_rounds = 500;
    cfg.mod = {0.5, 2.0};
    cfg.ch = {0.8, 0.01};
    cfg.seed = 5;
    auto result = montecarlo::run_collect(cfg);

    std::ostringstream out;
    io::write_record_header(out);
    for (const auto& rec : result.records) {
        io::write_record(out, rec);
    }
    std::istringstream in(out.str());
    std::vector<montecarlo::TrialRecord> parsed;
    io::read_records(in, [&](const montecarlo::TrialRecord& rec) { parsed.push_back(rec); });
    REQUIRE(parsed.size() == result.records.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].m == result.records[i].m);
        CHECK(parsed[i].bob_basis == result.records[i].bob_basis);
        CHECK(parsed[i].alice_bit == result.records[i].alice_bit);
        // Values survive the 12-significant-digit round trip.
        CHECK(parsed[i].x_a == doctest::Approx(result.records[i].x_a).epsilon(1e-11));
    }

    std::istringstream bad("round,m,x_a,p_a,bob_basis,bob_value,alice_bit,bob_bit\n"
                           "0,1,0.5,0.5,q,0.1,0,1\n");
    try {
        io::read_records(bad, [](const montecarlo::TrialRecord&) {});
        FAIL("expected parse_error");
    } catch (const io::parse_error& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("end-to-end: simulate twice, byte-identical; estimate consumes the file") {
    auto records_a = tmp_path("records_a.csv");
    auto records_b = tmp_path("records_b.csv");
    auto summary_a = tmp_path("summary_a.json");
    auto summary_b = tmp_path("summary_b.json");

    std::string args = "simulate --n 20000 --seed 42 --eta 0.5 --epsilon 0.01 --beta 20";
    REQUIRE(qkd_test::run_binary(args + " --out " + records_a.string() + " --summary " +
                                 summary_a.string()) == 0);
    REQUIRE(qkd_test::run_binary(args + " --threads 4 --out " + records_b.string() +
                                 " --summary " + summary_b.string()) == 0);
    auto bytes_a = qkd_test::read_file(records_a.string());
    auto bytes_b = qkd_test::read_file(records_b.string());
    CHECK(!bytes_a.empty());
    CHECK(bytes_a == bytes_b);
    CHECK(qkd_test::read_file(summary_a.string()) == qkd_test::read_file(summary_b.string()));

    auto estimate_out = tmp_path("estimate.json");
    REQUIRE(qkd_test::run_binary("estimate " + records_a.string() +
                                 " --alpha 0.5 --beta 20 --out " + estimate_out.string()) == 0);
    auto doc = json::parse(qkd_test::read_file(estimate_out.string()));
    CHECK(doc.contains("covariance"));
    CHECK(doc.contains("key_rate"));
    double eta_hat = doc.at("channel").at("eta_hat").at("value").get<double>();
    CHECK(eta_hat > 0.3);
    CHECK(eta_hat < 0.7);

    for (const auto& path : {records_a, records_b, summary_a, summary_b, estimate_out}) {
        std::filesystem::remove(path);
    }
}

TEST_CASE("environment override of the default truncation") {
    CHECK(cli::default_trunc_dim() == 64);
    setenv("QKD_DEFAULT_TRUNC_DIM", "128", 1);
    CHECK(cli::default_trunc_dim() == 128);
    setenv("QKD_DEFAULT_TRUNC_DIM", "bogus", 1);
    CHECK_THROWS_AS(cli::default_trunc_dim(), std::invalid_argument);
    unsetenv("QKD_DEFAULT_TRUNC_DIM");
}

TEST_CASE("end-to-end: exit codes") {
    CHECK(qkd_test::run_binary("simulate --n 0 --out /dev/null 2>/dev/null") == 1);
    CHECK(qkd_test::run_binary("estimate /nonexistent_records.csv 2>/dev/null") == 3);
    CHECK(qkd_test::run_binary("oracle --alpha 0.5 --beta 2 --dim 16 2>/dev/null >/dev/null") == 2);
    CHECK(qkd_test::run_binary("keyrate --scheme bogus 2>/dev/null") == 1);
}
