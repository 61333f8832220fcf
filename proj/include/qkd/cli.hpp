#ifndef QKD_CLI_HPP
#define QKD_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qkd/estimation.hpp"
#include "qkd/fock.hpp"
#include "qkd/montecarlo.hpp"
#include "qkd/security.hpp"

namespace qkd::cli {

/// Key-rate sweep over a distance grid and a list of excess-noise values.
struct SweepSpec {
    std::vector<double> distances_km; // strictly increasing
    std::vector<double> epsilons;     // strictly increasing
    double alpha = 0.5;
    double beta = 20.0;
    double beta_rec = 0.8;
    double loss_db_per_km = 0.2;
    std::optional<double> eta; // direct-eta mode: single point per epsilon
    security::Scheme scheme = security::Scheme::Improved;
    bool sift = false;
    bool alice_error = true;

    void validate() const;
};

SweepSpec default_sweep_spec(); // 0..100 km step 1, Fig.-style epsilon list

std::vector<security::KeyRateReport> run_sweep(const SweepSpec& spec);

/// Rows ordered by (epsilon index, distance index); '#' comment lines echo
/// the spec, then the header row, then one row per grid point.
void write_sweep_csv(std::ostream& out, const SweepSpec& spec,
                     const std::vector<security::KeyRateReport>& rows);

/// First grid distance with k_rate <= 0, or +infinity when the curve stays
/// positive over the grid.
double cutoff_distance(const std::vector<security::KeyRateReport>& curve);

struct SimulateSpec {
    montecarlo::RunConfig run{};
    double distance_km = -1.0; // <0 means eta was given directly
    int threads = 1;
};

struct EstimateSpec {
    std::string records_path;
    protocol::ModulationParams mod{};
    security::ReconciliationConfig rec{};
    estimation::ASide a_side = estimation::ASide::Calibrated;
};

struct OracleSpec {
    double alpha = 0.5;
    double beta = 1.0;
    fock::TruncationConfig trunc{};
};

// Config-file/flag merging: each command reads a flat JSON object whose keys
// mirror the struct fields above; command-line values take precedence.
SweepSpec sweep_from_json(const nlohmann::json& cfg);
SimulateSpec simulate_from_json(const nlohmann::json& cfg);
EstimateSpec estimate_from_json(const nlohmann::json& cfg);
OracleSpec oracle_from_json(const nlohmann::json& cfg);

/// Default truncation dimension, honoring QKD_DEFAULT_TRUNC_DIM.
int default_trunc_dim();

// Command bodies shared by the binary and the tests.  Each returns the
// process exit code: 0 success, 1 config error, 2 numeric/physicality
// failure, 3 I/O failure.
int cmd_keyrate(const SweepSpec& spec, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateSpec& spec, const std::string& out_path,
                 const std::string& summary_path, std::ostream& err);
int cmd_estimate(const EstimateSpec& spec, std::ostream& out, std::ostream& err);
int cmd_oracle(const OracleSpec& spec, std::ostream& out, std::ostream& err);

} // namespace qkd::cli

#endif
