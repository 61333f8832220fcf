#ifndef QKD_IO_HPP
#define QKD_IO_HPP

#include <functional>
#include <iosfwd>
#include <string>

#include "qkd/estimation.hpp"
#include "qkd/montecarlo.hpp"
#include "qkd/oracle.hpp"
#include "qkd/security.hpp"

#include "json.hpp"

namespace qkd::io {

/// Numeric output carries 12 significant digits throughout.
std::string format_g12(double value);

/// Rounds through the 12-significant-digit representation, so JSON output
/// prints the same digits the CSV writers do.
double round_g12(double value);

/// Malformed input file; line() is 1-based.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// --- trial record CSV ---

extern const char* const kRecordCsvHeader;

void write_record_header(std::ostream& out);
void write_record(std::ostream& out, const montecarlo::TrialRecord& rec);

/// Streams records from CSV, invoking the callback per row.  Comment lines
/// (leading '#') are skipped; the header row is required.  Returns the
/// number of records read.
std::size_t read_records(std::istream& in,
                         const std::function<void(const montecarlo::TrialRecord&)>& cb);

// --- key-rate sweep CSV ---

extern const char* const kKeyRateCsvHeader;

void write_key_rate_header(std::ostream& out);
void write_key_rate_row(std::ostream& out, const security::KeyRateReport& report);

// --- JSON reports ---

nlohmann::json summary_to_json(const montecarlo::RunSummary& summary);
nlohmann::json key_rate_to_json(const security::KeyRateReport& report);
nlohmann::json covariance_to_json(const estimation::CovarianceEstimate& est);
nlohmann::json channel_estimate_to_json(const estimation::ChannelEstimate& est);
nlohmann::json oracle_report_to_json(const oracle::OracleReport& report);

/// Reads a flat JSON object from a config file.  Throws parse_error on
/// malformed JSON and std::invalid_argument when the top level is not an
/// object.
nlohmann::json load_config_file(const std::string& path);

} // namespace qkd::io

#endif
