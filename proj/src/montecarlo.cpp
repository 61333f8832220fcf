#include "qkd/montecarlo.hpp"

#include <condition_variable>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qkd/errors.hpp"
#include "qkd/rng.hpp"

namespace qkd::montecarlo {

namespace {

constexpr std::uint64_t kChunkRounds = 1 << 14;

int sign_bit(double value) { return value < 0.0 ? 1 : 0; }

int draw_mixture_component(Rng& rng) { return rng.uniform4(); }

int draw_from_posteriors(const std::array<double, 4>& c, Rng& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) {
        acc += c[m];
        if (u <= acc) {
            return m;
        }
    }
    return 3;
}

} // namespace

void RunConfig::validate() const {
    if (n_rounds < 1) {
        throw std::invalid_argument("n_rounds must be >= 1");
    }
    mod.validate();
    ch.validate();
}

TrialRecord simulate_round(const RunConfig& cfg, std::uint64_t index) {
    Rng rng = round_rng(cfg.seed, index);
    TrialRecord rec;
    rec.round = index;

    const double beta = cfg.mod.beta;
    if (cfg.scheme == SimScheme::Beamsplitter) {
        rec.m = draw_mixture_component(rng);
        rec.x_a = rng.gaussian(protocol::heterodyne_mean_x(beta, rec.m), 1.0);
        rec.p_a = rng.gaussian(protocol::heterodyne_mean_p(beta, rec.m), 1.0);
    } else {
        // Marginal draws as prescribed for the TRNG scheme: each quadrature
        // from its own four-component mixture, then m from the posteriors.
        int mx = draw_mixture_component(rng);
        rec.x_a = rng.gaussian(protocol::heterodyne_mean_x(beta, mx), 1.0);
        int mp = draw_mixture_component(rng);
        rec.p_a = rng.gaussian(protocol::heterodyne_mean_p(beta, mp), 1.0);
        auto c = protocol::conditional_coefficients(rec.x_a, rec.p_a, beta);
        rec.m = draw_from_posteriors(c, rng);
    }

    auto [bx, bp] = channel::transmit_sample(protocol::signal_mean_x(cfg.mod.alpha, rec.m),
                                             protocol::signal_mean_p(cfg.mod.alpha, rec.m),
                                             cfg.ch, rng);
    rec.bob_basis = (rng.uniform_bit() == 0) ? Basis::X : Basis::P;
    if (rec.bob_basis == Basis::X) {
        rec.bob_value = bx;
        rec.alice_bit = sign_bit(rec.x_a);
    } else {
        rec.bob_value = bp;
        rec.alice_bit = sign_bit(rec.p_a);
    }
    rec.bob_bit = sign_bit(rec.bob_value);
    return rec;
}

void SummaryAccumulator::add(const TrialRecord& rec) {
    ++n_;
    if (rec.alice_bit != rec.bob_bit) {
        ++errors_;
    }
    ++m_counts_[static_cast<std::size_t>(rec.m & 3)];
    BasisSums& s = (rec.bob_basis == Basis::X) ? x_ : p_;
    ++s.n;
    s.xa.add(rec.x_a);
    s.pa.add(rec.p_a);
    s.bob.add(rec.bob_value);
    s.xa2.add(rec.x_a * rec.x_a);
    s.pa2.add(rec.p_a * rec.p_a);
    s.bob2.add(rec.bob_value * rec.bob_value);
    s.xa_bob.add(rec.x_a * rec.bob_value);
    s.pa_bob.add(rec.p_a * rec.bob_value);
}

BasisMoments SummaryAccumulator::to_moments(const BasisSums& s) const {
    BasisMoments m;
    m.n = s.n;
    if (s.n == 0) {
        return m;
    }
    double n = static_cast<double>(s.n);
    m.mean_x_a = s.xa.sum / n;
    m.mean_p_a = s.pa.sum / n;
    m.mean_bob = s.bob.sum / n;
    m.var_x_a = s.xa2.sum / n - m.mean_x_a * m.mean_x_a;
    m.var_p_a = s.pa2.sum / n - m.mean_p_a * m.mean_p_a;
    m.var_bob = s.bob2.sum / n - m.mean_bob * m.mean_bob;
    m.cov_x_a_bob = s.xa_bob.sum / n - m.mean_x_a * m.mean_bob;
    m.cov_p_a_bob = s.pa_bob.sum / n - m.mean_p_a * m.mean_bob;
    return m;
}

RunSummary SummaryAccumulator::finish() const {
    RunSummary out;
    out.n = n_;
    out.bit_errors = errors_;
    out.empirical_ber = n_ > 0 ? static_cast<double>(errors_) / static_cast<double>(n_) : 0.0;
    out.m_counts = m_counts_;
    out.x_basis = to_moments(x_);
    out.p_basis = to_moments(p_);
    return out;
}

namespace {

void run_single_threaded(const RunConfig& cfg, const RecordSink& sink,
                         SummaryAccumulator& acc) {
    for (std::uint64_t i = 0; i < cfg.n_rounds; ++i) {
        TrialRecord rec = simulate_round(cfg, i);
        acc.add(rec);
        if (sink) {
            sink(rec);
        }
    }
}

// Workers generate fixed-size chunks; a turnstile flushes them to the sink
// and the accumulator strictly in chunk order, so the observable stream is
// identical for every worker count.
void run_multi_threaded(const RunConfig& cfg, const RecordSink& sink,
                        SummaryAccumulator& acc, int n_threads) {
    const std::uint64_t n_chunks = (cfg.n_rounds + kChunkRounds - 1) / kChunkRounds;
    std::mutex mu;
    std::condition_variable cv;
    std::uint64_t next_to_generate = 0;
    std::uint64_t next_to_flush = 0;

    auto worker = [&]() {
        std::vector<TrialRecord> buffer;
        buffer.reserve(kChunkRounds);
        while (true) {
            std::uint64_t chunk;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next_to_generate >= n_chunks) {
                    return;
                }
                chunk = next_to_generate++;
            }
            const std::uint64_t begin = chunk * kChunkRounds;
            const std::uint64_t end = std::min(cfg.n_rounds, begin + kChunkRounds);
            buffer.clear();
            for (std::uint64_t i = begin; i < end; ++i) {
                buffer.push_back(simulate_round(cfg, i));
            }
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return next_to_flush == chunk; });
            for (const TrialRecord& rec : buffer) {
                acc.add(rec);
                if (sink) {
                    sink(rec);
                }
            }
            ++next_to_flush;
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
}

} // namespace

RunSummary run(const RunConfig& cfg, const RecordSink& sink, int n_threads) {
    cfg.validate();
    SummaryAccumulator acc;
    if (n_threads <= 1) {
        run_single_threaded(cfg, sink, acc);
    } else {
        run_multi_threaded(cfg, sink, acc, n_threads);
    }
    return acc.finish();
}

RunResult run_collect(const RunConfig& cfg, int n_threads) {
    RunResult result;
    result.records.reserve(cfg.n_rounds);
    result.summary = run(
        cfg, [&](const TrialRecord& rec) { result.records.push_back(rec); }, n_threads);
    return result;
}

double empirical_ber(std::span<const TrialRecord> records) {
    if (records.empty()) {
        throw insufficient_data_error("empirical BER needs at least one record");
    }
    std::uint64_t errors = 0;
    for (const TrialRecord& rec : records) {
        if (rec.alice_bit != rec.bob_bit) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(records.size());
}

} // namespace qkd::montecarlo
