#include "wigner/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wigner::output {

namespace ex = wigner::experiment;
namespace pv = wigner::perspectives;
namespace rs = wigner::reasoning;
namespace sv = wigner::statevec;

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string join_labels(const std::vector<std::string>& labels) {
    std::string s;
    for (const auto& l : labels) {
        if (!s.empty()) s += ",";
        s += l;
    }
    return s;
}

Json ket_json(const sv::Ket& k) {
    Json amps = Json::object();
    for (const auto& [idx, amp] : k.amplitudes()) {
        Json pair = Json::array();
        pair.push_back(amp.real());
        pair.push_back(amp.imag());
        amps[join_labels(k.labels_for(idx))] = pair;
    }
    Json o;
    o["space"] = sv::space_name(k.space());
    o["amplitudes"] = amps;
    return o;
}

Json probability_json(double p) {
    Json o;
    o["probability"] = p;
    if (auto sym = symbolic_annotation(p)) o["symbolic"] = *sym;
    return o;
}

Json tree_json(const ex::BranchNode& node) {
    Json o;
    o["step"] = node.step;
    if (!node.outcome.empty()) o["outcome"] = node.outcome;
    o["probability"] = node.probability;
    o["state"] = ket_json(node.state);
    if (!node.children.empty()) {
        Json children = Json::array();
        for (const auto& c : node.children) children.push_back(tree_json(c));
        o["children"] = children;
    }
    return o;
}

Json verdict_json(const rs::Verdict& v) {
    Json o;
    o["pathway"] = v.pathway.to_string();
    Json times;
    times["wbar"] = ex::to_string(v.pathway.wbar);
    times["f"] = ex::to_string(v.pathway.f);
    times["fbar"] = ex::to_string(v.pathway.fbar);
    o["times"] = times;
    o["kind"] = rs::kind_name(v.kind);
    if (const auto* cp = std::get_if<rs::ConsistentPrediction>(&v.kind)) {
        o["probability"] = cp->probability;
        if (auto sym = symbolic_annotation(cp->probability)) o["symbolic"] = *sym;
    } else if (const auto* cq = std::get_if<rs::ContradictionWithQM>(&v.kind)) {
        o["claimed"] = cq->claimed;
        o["quantum"] = cq->quantum;
    } else {
        const auto& bp = std::get<rs::BrokenPremise>(v.kind);
        o["failing_hop"] = bp.failing_hop;
        o["description"] = bp.description;
    }
    if (!v.detail.empty()) o["detail"] = v.detail;
    return o;
}

Json joint_table_json(const ex::OutcomeTable& table) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < table.kCells.size(); ++i) {
        Json row;
        row["outcome_wbar"] = table.kCells[i].first;
        row["outcome_w"] = table.kCells[i].second;
        row["probability"] = table.p[i];
        if (auto sym = symbolic_annotation(table.p[i])) row["symbolic"] = *sym;
        rows.push_back(row);
    }
    return rows;
}

} // namespace

std::optional<std::string> symbolic_annotation(double p) {
    static const std::pair<double, const char*> kKnown[] = {
        {1.0 / 12.0, "1/12"},
        {1.0 / 6.0, "1/6"},
        {1.0 / 10.0, "1/10"},
        {9.0 / 10.0, "9/10"},
        {0.5, "1/2"},
        {2.0 / 3.0, "2/3"},
        {3.0 / 4.0, "3/4"},
        {5.0 / 6.0, "5/6"},
        {1.0 / 3.0, "1/3"},
        {1.0 / (4.0 - 2.0 * std::sqrt(2.0)), "1/(4-2*sqrt(2))"},
        {1.0 / (4.0 + 2.0 * std::sqrt(2.0)), "1/(4+2*sqrt(2))"},
    };
    for (const auto& [value, text] : kKnown)
        if (std::abs(p - value) <= 1e-9) return text;
    return std::nullopt;
}

Json metadata(const ex::Protocol& protocol, std::optional<std::uint64_t> seed,
              bool stamp) {
    Json m;
    m["version"] = kVersion;
    m["config_hash"] = protocol.config().hash();
    if (seed) m["seed"] = *seed;
    if (stamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        m["generated_at"] = buf;
    }
    return m;
}

Json exact_document(const ex::Protocol& protocol, bool stamp) {
    const auto& tree = protocol.tree();
    const auto table = ex::joint_distribution(tree);

    Json doc;
    doc["command"] = "exact";
    doc["metadata"] = metadata(protocol, std::nullopt, stamp);
    doc["joint"] = joint_table_json(table);

    Json marginals;
    Json wbar;
    wbar[ex::names::kOkbar] = probability_json(table.marginal_wbar(ex::names::kOkbar));
    wbar[ex::names::kFailsbar] =
        probability_json(table.marginal_wbar(ex::names::kFailsbar));
    marginals["wbar"] = wbar;
    Json w;
    w[ex::names::kOk] = probability_json(table.marginal_w(ex::names::kOk));
    w[ex::names::kFails] = probability_json(table.marginal_w(ex::names::kFails));
    marginals["w"] = w;
    doc["marginals"] = marginals;

    Json conditionals;
    Json given;
    for (const char* x : {ex::names::kOkbar, ex::names::kFailsbar}) {
        if (table.marginal_wbar(x) <= sv::kTol) continue;
        Json row;
        row[ex::names::kOk] =
            probability_json(table.conditional_w_given_wbar(ex::names::kOk, x));
        row[ex::names::kFails] =
            probability_json(table.conditional_w_given_wbar(ex::names::kFails, x));
        given[x] = row;
    }
    conditionals["w_given_wbar"] = given;
    doc["conditionals"] = conditionals;

    doc["branch_tree"] = tree_json(tree.root());
    return doc;
}

Json simulate_document(const ex::Protocol& protocol,
                       const ex::FrequencyTable& table, bool stamp) {
    Json doc;
    doc["command"] = "simulate";
    Json meta = metadata(protocol, table.seed, stamp);
    meta["rounds"] = table.rounds;
    doc["metadata"] = meta;

    Json rows = Json::array();
    for (std::size_t i = 0; i < ex::OutcomeTable::kCells.size(); ++i) {
        Json row;
        row["outcome_wbar"] = ex::OutcomeTable::kCells[i].first;
        row["outcome_w"] = ex::OutcomeTable::kCells[i].second;
        row["count"] = table.joint_counts[i];
        row["frequency"] = table.frequency(i);
        row["stderr"] = table.standard_error(i);
        rows.push_back(row);
    }
    doc["frequencies"] = rows;

    Json marginals;
    Json wbar;
    wbar[ex::names::kOkbar] = table.wbar_frequency(ex::names::kOkbar);
    wbar[ex::names::kFailsbar] = table.wbar_frequency(ex::names::kFailsbar);
    marginals["wbar"] = wbar;
    Json w;
    w[ex::names::kOk] = table.w_frequency(ex::names::kOk);
    w[ex::names::kFails] = table.w_frequency(ex::names::kFails);
    marginals["w"] = w;
    const double n = table.rounds ? static_cast<double>(table.rounds) : 1.0;
    Json r;
    r[ex::names::kHeads] = static_cast<double>(table.r_counts[0]) / n;
    r[ex::names::kTails] = static_cast<double>(table.r_counts[1]) / n;
    marginals["r"] = r;
    Json z;
    z[ex::names::kMinus] = static_cast<double>(table.z_counts[0]) / n;
    z[ex::names::kPlus] = static_cast<double>(table.z_counts[1]) / n;
    marginals["z"] = z;
    doc["marginals"] = marginals;

    doc["degenerate_stderr"] = table.degenerate();
    return doc;
}

namespace {

Json body_json(const pv::PerspectiveState& state) {
    Json o;
    o["target"] = pv::to_string(state.target);
    if (const auto* ket = std::get_if<sv::Ket>(&state.body)) {
        o["kind"] = "pure";
        o["state"] = ket_json(*ket);
    } else if (const auto* rho = std::get_if<sv::DensityMatrix>(&state.body)) {
        o["kind"] = "mixed";
        Json labels = Json::array();
        for (const auto& l : rho->basis_labels()) labels.push_back(join_labels(l));
        o["basis"] = labels;
        Json matrix = Json::array();
        for (std::size_t i = 0; i < rho->dim(); ++i) {
            Json row = Json::array();
            for (std::size_t j = 0; j < rho->dim(); ++j) {
                Json cell = Json::array();
                cell.push_back(rho->entry(i, j).real());
                cell.push_back(rho->entry(i, j).imag());
                row.push_back(cell);
            }
            matrix.push_back(row);
        }
        o["matrix"] = matrix;
    } else {
        const auto& rsup = std::get<pv::RecordSuperposition>(state.body);
        o["kind"] = "record_superposition";
        Json branches = Json::array();
        for (const auto& b : rsup.branches()) {
            Json bj;
            bj["label"] = b.label;
            bj["coefficient"] = b.coefficient;
            bj["claimed_ok_probability"] = b.claim;
            bj["record"] = ket_json(b.record);
            branches.push_back(bj);
        }
        o["branches"] = branches;
        Json gram = Json::array();
        for (const auto& row : rsup.gram()) {
            Json gr = Json::array();
            for (const auto& cell : row) {
                Json c = Json::array();
                c.push_back(cell.real());
                c.push_back(cell.imag());
                gr.push_back(c);
            }
            gram.push_back(gr);
        }
        o["gram"] = gram;
        o["state"] = ket_json(rsup.as_ket());
    }
    return o;
}

} // namespace

Json perspectives_document(const ex::Protocol& protocol, pv::Agent agent,
                           ex::TimePoint time, const pv::Conditioning& cond,
                           bool stamp) {
    Json doc;
    doc["command"] = "perspectives";
    doc["metadata"] = metadata(protocol, std::nullopt, stamp);
    doc["agent"] = pv::to_string(agent);
    doc["time"] = ex::to_string(time);
    doc["clock_alias"] = ex::clock_alias(time);
    Json cj = Json::object();
    if (cond.wbar) cj["wbar"] = *cond.wbar;
    if (cond.w) cj["w"] = *cond.w;
    if (cond.z) cj["z"] = *cond.z;
    if (cond.lbar_hypothesis) cj["hyp"] = *cond.lbar_hypothesis;
    doc["conditioning"] = cj;

    Json assignments = Json::array();
    for (const auto& state : pv::assign_states(protocol, agent, time, cond)) {
        Json a = body_json(state);
        if (const auto* rho = std::get_if<sv::DensityMatrix>(&state.body)) {
            // Diagonal of the first-lab assignment in the announced-outcome
            // basis, the form the matching criterion is stated in.
            if (state.target == pv::Lab::LBar) {
                const auto m = rho->matrix_in_basis(
                    {protocol.wbar_vector(ex::names::kOkbar),
                     protocol.wbar_vector(ex::names::kFailsbar)});
                Json diag;
                diag[ex::names::kOkbar] = m[0][0].real();
                diag[ex::names::kFailsbar] = m[1][1].real();
                a["diagonal_in_outcome_basis"] = diag;
            }
        }
        assignments.push_back(a);
    }
    doc["assignments"] = assignments;

    if (agent == pv::Agent::FBar && cond.lbar_hypothesis) {
        const auto dist = pv::open_lab_message(protocol, *cond.lbar_hypothesis);
        Json mj;
        Json entries = Json::array();
        for (const auto& e : dist.entries) {
            Json ej;
            ej["quasi_weight"] = e.quasi_weight;
            ej["message_claimed_probability"] = e.message;
            entries.push_back(ej);
        }
        mj["entries"] = entries;
        mj["effective_probability"] = dist.effective_probability;
        if (auto sym = symbolic_annotation(dist.effective_probability))
            mj["symbolic"] = *sym;
        mj["born_check"] = dist.born_check;
        doc["message_model"] = mj;
    }
    return doc;
}

Json reason_document(const ex::Protocol& protocol,
                     const std::vector<rs::Verdict>& verdicts, bool stamp) {
    Json doc;
    doc["command"] = "reason";
    doc["metadata"] = metadata(protocol, std::nullopt, stamp);
    doc["semantics_note"] =
        "pathway classification for chains other than the equal-time and "
        "fully backdated ones follows this tool's premise-validity rules";
    Json vj = Json::array();
    for (const auto& v : verdicts) vj.push_back(verdict_json(v));
    doc["verdicts"] = vj;
    return doc;
}

Json report_document(const ex::Protocol& protocol, const rs::Report& report,
                     bool stamp) {
    Json doc;
    doc["command"] = "report";
    doc["metadata"] = metadata(protocol, std::nullopt, stamp);
    doc["joint"] = joint_table_json(report.joint);

    Json chain;
    chain["p_tails"] = report.chain.p_tails;
    chain["p_zplus_given_tails"] = report.chain.p_zplus_given_tails;
    chain["p_okbar_given_zplus"] = report.chain.p_okbar_given_zplus;
    chain["p_ok_given_okbar"] = report.chain.p_ok_given_okbar;
    chain["product"] = report.chain.product;
    if (auto sym = symbolic_annotation(report.chain.product))
        chain["symbolic"] = *sym;
    doc["conditional_chain"] = chain;

    Json et;
    Json weights;
    weights[ex::names::kOkbar] = report.equal_time.prediction.weights[0];
    weights[ex::names::kFailsbar] = report.equal_time.prediction.weights[1];
    et["weights"] = weights;
    Json effectives;
    effectives[ex::names::kOkbar] = report.equal_time.prediction.effectives[0];
    effectives[ex::names::kFailsbar] = report.equal_time.prediction.effectives[1];
    et["effectives"] = effectives;
    et["prediction"] = report.equal_time.prediction.probability;
    et["herald_probability"] = report.equal_time.prediction.herald_probability;
    et["joint"] = report.equal_time.prediction.joint;
    et["literal_variant_value"] = report.equal_time.literal_variant_value;
    et["statement_a_i"] = report.equal_time.statement_a_i.describe();
    et["statement_a_ii"] = report.equal_time.statement_a_ii.describe();
    Json lines = Json::array();
    for (const auto& l : report.equal_time.lines) lines.push_back(l);
    et["derivation"] = lines;
    doc["equal_time"] = et;

    Json neq;
    neq["heralded_z_minus"] = report.non_equal_time.heralded_z_minus;
    neq["premise_z_minus"] = report.non_equal_time.premise_z_minus;
    neq["contradiction"] = report.non_equal_time.contradiction;
    doc["non_equal_time"] = neq;

    Json vj = Json::array();
    for (const auto& v : report.verdicts) vj.push_back(verdict_json(v));
    doc["verdicts"] = vj;

    Json overall;
    overall["consistent"] = report.consistent;
    overall["equal_time_prediction"] = report.equal_time_prediction;
    overall["quantum_conditional"] = report.quantum_conditional;
    doc["overall"] = overall;
    doc["semantics_note"] = report.semantics_note;
    return doc;
}

std::string render_json(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

void markdown_table(std::ostringstream& os, const Json& rows,
                    const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << "| " << cols[i] << " ";
    os << "|\n";
    for (std::size_t i = 0; i < cols.size(); ++i) os << "| --- ";
    os << "|\n";
    for (const auto& row : rows) {
        for (const auto& col : cols) {
            os << "| ";
            if (!row.contains(col)) {
                os << " ";
            } else if (row[col].is_number_float()) {
                os << fmt6(row[col].get<double>());
            } else if (row[col].is_number_integer() ||
                       row[col].is_number_unsigned()) {
                os << row[col].dump();
            } else if (row[col].is_string()) {
                os << row[col].get<std::string>();
            } else {
                os << row[col].dump();
            }
            os << " ";
        }
        os << "|\n";
    }
}

void markdown_scalar_map(std::ostringstream& os, const Json& obj) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        os << "- " << it.key() << ": ";
        if (it.value().is_number_float())
            os << fmt6(it.value().get<double>());
        else if (it.value().is_object() && it.value().contains("probability")) {
            os << fmt6(it.value()["probability"].get<double>());
            if (it.value().contains("symbolic"))
                os << " (" << it.value()["symbolic"].get<std::string>() << ")";
        } else if (it.value().is_string())
            os << it.value().get<std::string>();
        else
            os << it.value().dump();
        os << "\n";
    }
}

} // namespace

std::string render_markdown(const Json& doc) {
    std::ostringstream os;
    const std::string command = doc["command"].get<std::string>();
    os << "# " << command << "\n\n";
    os << "config hash: " << doc["metadata"]["config_hash"].get<std::string>()
       << "\n\n";

    if (command == "exact") {
        os << "## Joint distribution\n\n";
        markdown_table(os, doc["joint"],
                       {"outcome_wbar", "outcome_w", "probability", "symbolic"});
        os << "\n## Marginals (wbar)\n\n";
        markdown_scalar_map(os, doc["marginals"]["wbar"]);
        os << "\n## Marginals (w)\n\n";
        markdown_scalar_map(os, doc["marginals"]["w"]);
        os << "\n## Conditionals P(w | wbar)\n\n";
        for (auto it = doc["conditionals"]["w_given_wbar"].begin();
             it != doc["conditionals"]["w_given_wbar"].end(); ++it) {
            os << "given " << it.key() << ":\n";
            markdown_scalar_map(os, it.value());
        }
    } else if (command == "simulate") {
        os << "rounds: " << doc["metadata"]["rounds"].dump()
           << ", seed: " << doc["metadata"]["seed"].dump() << "\n\n";
        os << "## Joint frequencies\n\n";
        markdown_table(os, doc["frequencies"],
                       {"outcome_wbar", "outcome_w", "count", "frequency",
                        "stderr"});
        os << "\n## Marginals\n\n";
        for (auto it = doc["marginals"].begin(); it != doc["marginals"].end();
             ++it) {
            os << "### " << it.key() << "\n";
            markdown_scalar_map(os, it.value());
            os << "\n";
        }
    } else if (command == "reason") {
        os << doc["semantics_note"].get<std::string>() << "\n\n";
        os << "## Verdicts\n\n";
        markdown_table(os, doc["verdicts"],
                       {"pathway", "kind", "probability", "claimed", "quantum",
                        "failing_hop"});
    } else if (command == "perspectives") {
        os << "agent " << doc["agent"].get<std::string>() << " at "
           << doc["time"].get<std::string>() << ", conditioning "
           << doc["conditioning"].dump() << "\n\n";
        os << "```json\n" << doc["assignments"].dump(2) << "\n```\n";
        if (doc.contains("message_model"))
            os << "\n## Message model\n\n```json\n"
               << doc["message_model"].dump(2) << "\n```\n";
    } else if (command == "report") {
        os << "## Joint distribution\n\n";
        markdown_table(os, doc["joint"],
                       {"outcome_wbar", "outcome_w", "probability", "symbolic"});
        os << "\n## Conditional chain\n\n";
        markdown_scalar_map(os, doc["conditional_chain"]);
        os << "\n## Equal-time deduction\n\n";
        os << "- prediction: " << fmt6(doc["equal_time"]["prediction"].get<double>())
           << "\n- joint: " << fmt6(doc["equal_time"]["joint"].get<double>())
           << "\n- statement: " << doc["equal_time"]["statement_a_ii"].get<std::string>()
           << "\n";
        os << "\n## Back-dating check\n\n";
        markdown_scalar_map(os, doc["non_equal_time"]);
        os << "\n## Verdicts\n\n";
        markdown_table(os, doc["verdicts"],
                       {"pathway", "kind", "probability", "claimed", "quantum",
                        "failing_hop"});
        os << "\n## Overall\n\n";
        markdown_scalar_map(os, doc["overall"]);
        os << "\n" << doc["semantics_note"].get<std::string>() << "\n";
    } else {
        os << "```json\n" << doc.dump(2) << "\n```\n";
    }
    return os.str();
}

std::string render_csv(const Json& doc) {
    const std::string command = doc["command"].get<std::string>();
    std::ostringstream os;
    os << "outcome_wbar,outcome_w,probability,stderr\n";
    if (command == "exact") {
        for (const auto& row : doc["joint"])
            os << row["outcome_wbar"].get<std::string>() << ","
               << row["outcome_w"].get<std::string>() << ","
               << fmt12(row["probability"].get<double>()) << ",\n";
    } else if (command == "simulate") {
        for (const auto& row : doc["frequencies"])
            os << row["outcome_wbar"].get<std::string>() << ","
               << row["outcome_w"].get<std::string>() << ","
               << fmt12(row["frequency"].get<double>()) << ","
               << fmt12(row["stderr"].get<double>()) << "\n";
    } else {
        throw ex::InvalidArgumentError("csv output is defined for 'exact' and "
                                       "'simulate' only");
    }
    return os.str();
}

} // namespace wigner::output
