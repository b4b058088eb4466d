// Protocol configuration: initial coin amplitudes, spin preparations and the
// three measurement bases, with the standard values as defaults. Loadable
// from a JSON file whose amplitude entries may use an exact "sqrt:p/q" form.

#ifndef WIGNER_CONFIG_HPP
#define WIGNER_CONFIG_HPP

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "wigner/timepoint.hpp"

namespace wigner::config {

struct ValidationError : std::runtime_error {
    std::string field;
    ValidationError(std::string field_, const std::string& what_)
        : std::runtime_error(field_ + ": " + what_), field(std::move(field_)) {}
};

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int line_, int column_, const std::string& what_)
        : std::runtime_error("parse error at line " + std::to_string(line_) +
                             ", column " + std::to_string(column_) + ": " + what_),
          line(line_), column(column_) {}
};

/// 2x2 real amplitude table: row = outcome vector, column = canonical basis
/// entry of the measured subsystem.
using BasisTable = std::array<std::array<double, 2>, 2>;

struct ProtocolConfig {
    // R initial state over (heads, tails).
    double a_heads;
    double a_tails;

    // Spin preparation per coin outcome, amplitudes over S = (down, up).
    std::array<double, 2> spin_prep_heads;
    std::array<double, 2> spin_prep_tails;

    // F measures S; rows (down, up) over S basis (down, up).
    BasisTable f_basis;
    // WBar measures the first lab; rows (okbar, failsbar) over (hbar, tbar).
    BasisTable wbar_basis;
    // W measures the second lab; rows (ok, fails) over (minus, plus).
    BasisTable w_basis;

    // Step name -> time point; fixed keys init/fbar/f/wbar/w.
    std::map<std::string, experiment::TimePoint> time_labels;

    static ProtocolConfig paper_default();

    /// Throws ValidationError naming the offending field.
    void validate() const;

    /// True when every entry matches the default values within 1e-9.
    bool is_default() const;

    /// Stable serialization used for hashing and round-trips.
    std::string canonical_json() const;

    /// FNV-1a over canonical_json(), as a hex string.
    std::string hash() const;
};

/// Accepts a plain number or a string "sqrt:p/q" / "-sqrt:p/q" (p, q positive
/// integers), evaluated as +-sqrt(p/q).
double parse_amplitude_string(const std::string& text);

/// Loads and validates a config file. Throws ParseError (with line/column) on
/// malformed JSON and ValidationError on constraint violations.
ProtocolConfig load_file(const std::string& path);

/// Parses a config from JSON text (same errors as load_file).
ProtocolConfig from_json_text(const std::string& text);

} // namespace wigner::config

#endif // WIGNER_CONFIG_HPP
