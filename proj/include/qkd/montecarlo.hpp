#ifndef QKD_MONTECARLO_HPP
#define QKD_MONTECARLO_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/protocol.hpp"

namespace qkd::montecarlo {

enum class SimScheme {
    Beamsplitter, // split a modulated coherent state; exact by construction
    Trng,         // draw (x_A, p_A) from the marginals, then m from the posteriors
};

struct RunConfig {
    SimScheme scheme = SimScheme::Beamsplitter;
    std::uint64_t n_rounds = 0;
    protocol::ModulationParams mod{};
    channel::ChannelParams ch{};
    std::uint64_t seed = 0;

    void validate() const; // n_rounds >= 1 plus parameter checks
};

enum class Basis : std::uint8_t { X = 0, P = 1 };

/// One simulated round.  Bits are the signs of the matching quadrature
/// values (negative value -> bit 1).
struct TrialRecord {
    std::uint64_t round = 0;
    int m = 0;               // prepared constellation index
    double x_a = 0.0;        // Alice's heterodyne pair (raw post-split values)
    double p_a = 0.0;
    Basis bob_basis = Basis::X;
    double bob_value = 0.0;  // Bob's homodyne outcome in the chosen basis
    int alice_bit = 0;
    int bob_bit = 0;
};

/// First/second moments of (x_A, p_A, bob_value) for the rounds measured in
/// one basis.  Accumulated with compensated sums so the result does not
/// depend on how generation was scheduled.
struct BasisMoments {
    std::uint64_t n = 0;
    double mean_x_a = 0.0, mean_p_a = 0.0, mean_bob = 0.0;
    double var_x_a = 0.0, var_p_a = 0.0, var_bob = 0.0;
    double cov_x_a_bob = 0.0, cov_p_a_bob = 0.0;
};

struct RunSummary {
    std::uint64_t n = 0;
    std::uint64_t bit_errors = 0;
    double empirical_ber = 0.0;
    std::array<std::uint64_t, 4> m_counts{};
    BasisMoments x_basis{};
    BasisMoments p_basis{};
};

/// Order-insensitive accumulator: Kahan-compensated raw power sums,
/// converted to central moments on demand.
class SummaryAccumulator {
public:
    void add(const TrialRecord& rec);
    RunSummary finish() const;

private:
    struct Kahan {
        double sum = 0.0;
        double carry = 0.0;
        void add(double value) {
            double y = value - carry;
            double t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
    };
    struct BasisSums {
        std::uint64_t n = 0;
        Kahan xa, pa, bob, xa2, pa2, bob2, xa_bob, pa_bob;
    };
    BasisMoments to_moments(const BasisSums& s) const;

    std::uint64_t n_ = 0;
    std::uint64_t errors_ = 0;
    std::array<std::uint64_t, 4> m_counts_{};
    BasisSums x_{}, p_{};
};

using RecordSink = std::function<void(const TrialRecord&)>;

/// Runs a simulation, invoking the sink once per round in round order.  The
/// record stream is a pure function of cfg: per-round randomness is derived
/// from (seed, round index), so any worker count yields identical output.
RunSummary run(const RunConfig& cfg, const RecordSink& sink, int n_threads = 1);

struct RunResult {
    std::vector<TrialRecord> records;
    RunSummary summary;
};

/// Convenience wrapper that keeps all records in memory.
RunResult run_collect(const RunConfig& cfg, int n_threads = 1);

/// Generates the single round `index` of the configured run.
TrialRecord simulate_round(const RunConfig& cfg, std::uint64_t index);

/// Fraction of rounds whose sifted bits disagree.  Throws on empty input.
double empirical_ber(std::span<const TrialRecord> records);

} // namespace qkd::montecarlo

#endif
