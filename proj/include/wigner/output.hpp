// Document builders for the CLI: JSON payloads (stable field order), plus
// markdown and CSV renderings. Identical inputs produce byte-identical
// documents; wall-clock metadata appears only behind the --stamp flag.

#ifndef WIGNER_OUTPUT_HPP
#define WIGNER_OUTPUT_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "wigner/experiment.hpp"
#include "wigner/perspectives.hpp"
#include "wigner/reasoning.hpp"

namespace wigner::output {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Symbolic form for probabilities from the protocol's closed value set
/// (1/12, 1/6, 1/10, 9/10, 1/2, 2/3, 3/4, 5/6, 1/3, 1/(4 -+ 2*sqrt(2))),
/// matched within 1e-9.
std::optional<std::string> symbolic_annotation(double p);

Json metadata(const experiment::Protocol& protocol,
              std::optional<std::uint64_t> seed, bool stamp);

Json exact_document(const experiment::Protocol& protocol, bool stamp);
Json simulate_document(const experiment::Protocol& protocol,
                       const experiment::FrequencyTable& table, bool stamp);
Json perspectives_document(const experiment::Protocol& protocol,
                           perspectives::Agent agent, experiment::TimePoint time,
                           const perspectives::Conditioning& cond, bool stamp);
Json reason_document(const experiment::Protocol& protocol,
                     const std::vector<reasoning::Verdict>& verdicts, bool stamp);
Json report_document(const experiment::Protocol& protocol,
                     const reasoning::Report& report, bool stamp);

std::string render_json(const Json& doc);
/// Tables with 6-significant-digit numbers.
std::string render_markdown(const Json& doc);
/// One row per outcome cell: outcome_wbar,outcome_w,probability,stderr
/// (stderr empty for exact tables). Only defined for exact and simulate
/// documents.
std::string render_csv(const Json& doc);

} // namespace wigner::output

#endif // WIGNER_OUTPUT_HPP
