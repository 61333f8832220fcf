#include "qkd/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "json.hpp"

namespace qkd::io {

std::string format_g12(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

double round_g12(double value) {
    return std::strtod(format_g12(value).c_str(), nullptr);
}

namespace {

using nlohmann::json;

json num(double value) { return json(round_g12(value)); }

json estimate_to_json(const estimation::Estimate& e) {
    return json{{"value", num(e.value)}, {"stderr", num(e.stderr_)}, {"n_used", e.n_used}};
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw parse_error("bad numeric field '" + std::string(field) + "'", line_no);
    }
    return value;
}

std::uint64_t parse_u64(std::string_view field, std::size_t line_no) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw parse_error("bad integer field '" + std::string(field) + "'", line_no);
    }
    return value;
}

} // namespace

const char* const kRecordCsvHeader =
    "round,m,x_a,p_a,bob_basis,bob_value,alice_bit,bob_bit";

void write_record_header(std::ostream& out) { out << kRecordCsvHeader << '\n'; }

void write_record(std::ostream& out, const montecarlo::TrialRecord& rec) {
    out << rec.round << ',' << rec.m << ',' << format_g12(rec.x_a) << ','
        << format_g12(rec.p_a) << ','
        << (rec.bob_basis == montecarlo::Basis::X ? 'x' : 'p') << ','
        << format_g12(rec.bob_value) << ',' << rec.alice_bit << ',' << rec.bob_bit
        << '\n';
}

std::size_t read_records(std::istream& in,
                         const std::function<void(const montecarlo::TrialRecord&)>& cb) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            if (line != kRecordCsvHeader) {
                throw parse_error("expected header '" + std::string(kRecordCsvHeader) + "'",
                                  line_no);
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 8) {
            throw parse_error("expected 8 fields, got " + std::to_string(fields.size()),
                              line_no);
        }
        montecarlo::TrialRecord rec;
        rec.round = parse_u64(fields[0], line_no);
        rec.m = static_cast<int>(parse_u64(fields[1], line_no));
        if (rec.m > 3) {
            throw parse_error("preparation index out of range", line_no);
        }
        rec.x_a = parse_double(fields[2], line_no);
        rec.p_a = parse_double(fields[3], line_no);
        if (fields[4] == "x") {
            rec.bob_basis = montecarlo::Basis::X;
        } else if (fields[4] == "p") {
            rec.bob_basis = montecarlo::Basis::P;
        } else {
            throw parse_error("basis must be 'x' or 'p'", line_no);
        }
        rec.bob_value = parse_double(fields[5], line_no);
        rec.alice_bit = static_cast<int>(parse_u64(fields[6], line_no));
        rec.bob_bit = static_cast<int>(parse_u64(fields[7], line_no));
        if ((rec.alice_bit | rec.bob_bit) > 1) {
            throw parse_error("bits must be 0 or 1", line_no);
        }
        cb(rec);
        ++count;
    }
    if (!header_seen) {
        throw parse_error("no header row found", line_no);
    }
    return count;
}

const char* const kKeyRateCsvHeader =
    "distance_km,eta,epsilon,ber,i_ab,s_bE,nu1,nu2,nu3,k_rate";

void write_key_rate_header(std::ostream& out) {
    out << "# columns: " << kKeyRateCsvHeader << '\n' << kKeyRateCsvHeader << '\n';
}

void write_key_rate_row(std::ostream& out, const security::KeyRateReport& r) {
    out << format_g12(r.distance_km) << ',' << format_g12(r.eta) << ','
        << format_g12(r.epsilon) << ',' << format_g12(r.ber) << ','
        << format_g12(r.i_ab) << ',' << format_g12(r.s_bE) << ','
        << format_g12(r.nu1) << ',' << format_g12(r.nu2) << ',' << format_g12(r.nu3)
        << ',' << format_g12(r.k_rate) << '\n';
}

nlohmann::json summary_to_json(const montecarlo::RunSummary& summary) {
    auto basis = [](const montecarlo::BasisMoments& m) {
        return json{{"n", m.n},
                    {"mean_x_a", num(m.mean_x_a)},
                    {"mean_p_a", num(m.mean_p_a)},
                    {"mean_bob", num(m.mean_bob)},
                    {"var_x_a", num(m.var_x_a)},
                    {"var_p_a", num(m.var_p_a)},
                    {"var_bob", num(m.var_bob)},
                    {"cov_x_a_bob", num(m.cov_x_a_bob)},
                    {"cov_p_a_bob", num(m.cov_p_a_bob)}};
    };
    return json{{"n", summary.n},
                {"bit_errors", summary.bit_errors},
                {"empirical_ber", num(summary.empirical_ber)},
                {"m_counts", summary.m_counts},
                {"x_basis", basis(summary.x_basis)},
                {"p_basis", basis(summary.p_basis)}};
}

nlohmann::json key_rate_to_json(const security::KeyRateReport& r) {
    return json{{"distance_km", num(r.distance_km)},
                {"eta", num(r.eta)},
                {"epsilon", num(r.epsilon)},
                {"ber", num(r.ber)},
                {"i_ab", num(r.i_ab)},
                {"s_bE", num(r.s_bE)},
                {"nu1", num(r.nu1)},
                {"nu2", num(r.nu2)},
                {"nu3", num(r.nu3)},
                {"k_rate", num(r.k_rate)}};
}

nlohmann::json covariance_to_json(const estimation::CovarianceEstimate& est) {
    auto quad = [](const estimation::QuadratureEstimate& q) {
        return json{{"v_a_mod", estimate_to_json(q.v_a_mod)},
                    {"c", estimate_to_json(q.c)},
                    {"c_cross", estimate_to_json(q.c_cross)},
                    {"v_b_total", estimate_to_json(q.v_b_total)},
                    {"v_b_excess", estimate_to_json(q.v_b_excess)}};
    };
    return json{{"n_records", est.n_records},
                {"x_basis", quad(est.x)},
                {"p_basis", quad(est.p)},
                {"pooled_c", estimate_to_json(est.pooled_c())},
                {"pooled_v_b_total", estimate_to_json(est.pooled_v_b_total())}};
}

nlohmann::json channel_estimate_to_json(const estimation::ChannelEstimate& est) {
    return json{{"eta_hat", estimate_to_json(est.eta_hat)},
                {"epsilon_hat", estimate_to_json(est.epsilon_hat)},
                {"epsilon_hat_clamped", num(est.epsilon_hat_clamped)}};
}

nlohmann::json oracle_report_to_json(const oracle::OracleReport& rep) {
    return json{{"alpha", num(rep.alpha)},
                {"beta", num(rep.beta)},
                {"dim", rep.dim},
                {"spectrum_dev", num(rep.spectrum_dev)},
                {"source_v_dev", num(rep.source_v_dev)},
                {"source_z_dev", num(rep.source_z_dev)},
                {"source_structure_dev", num(rep.source_structure_dev)},
                {"mixed_entries_dev", num(rep.mixed_entries_dev)},
                {"mixed_structure_dev", num(rep.mixed_structure_dev)},
                {"coefficients_dev", num(rep.coefficients_dev)},
                {"physicality_margin", num(rep.physicality_margin)},
                {"max_deviation", num(rep.max_deviation())},
                {"pass", rep.pass()}};
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    json cfg;
    try {
        in >> cfg;
    } catch (const json::parse_error& err) {
        throw parse_error(std::string("config parse error: ") + err.what(), 0);
    }
    if (!cfg.is_object()) {
        throw std::invalid_argument("config file must hold a flat JSON object");
    }
    return cfg;
}

} // namespace qkd::io
