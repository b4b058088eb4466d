#include "wigner/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wigner::config {

namespace {

using nlohmann::json;

constexpr double kFieldTol = 1e-9;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_unit(const std::string& field, double x, double y) {
    const double n2 = x * x + y * y;
    if (std::abs(n2 - 1.0) > kFieldTol)
        throw ValidationError(field, "amplitudes must be normalized, got norm^2 = " +
                                         fmt(n2));
}

void check_orthonormal(const std::string& field, const BasisTable& b) {
    check_unit(field, b[0][0], b[0][1]);
    check_unit(field, b[1][0], b[1][1]);
    const double dot = b[0][0] * b[1][0] + b[0][1] * b[1][1];
    if (std::abs(dot) > kFieldTol)
        throw ValidationError(field, "basis vectors are not orthogonal (overlap " +
                                         fmt(dot) + ")");
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double amp_from_json(const std::string& field, const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return parse_amplitude_string(v.get<std::string>());
        } catch (const std::exception& e) {
            throw ValidationError(field, e.what());
        }
    }
    throw ValidationError(field, "amplitude must be a number or a sqrt: string");
}

std::array<double, 2> pair_from_json(const std::string& field, const json& obj,
                                     const char* first, const char* second) {
    if (!obj.is_object())
        throw ValidationError(field, "expected an object with keys '" +
                                         std::string(first) + "' and '" + second + "'");
    std::array<double, 2> out{0.0, 0.0};
    out[0] = obj.contains(first) ? amp_from_json(field, obj.at(first)) : 0.0;
    out[1] = obj.contains(second) ? amp_from_json(field, obj.at(second)) : 0.0;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (it.key() != first && it.key() != second)
            throw ValidationError(field, "unknown key '" + it.key() + "'");
    return out;
}

BasisTable basis_from_json(const std::string& field, const json& obj,
                           const char* row0, const char* row1,
                           const char* col0, const char* col1) {
    if (!obj.is_object())
        throw ValidationError(field, "expected an object with keys '" +
                                         std::string(row0) + "' and '" + row1 + "'");
    BasisTable table{};
    if (!obj.contains(row0) || !obj.contains(row1))
        throw ValidationError(field, "both outcome rows are required");
    table[0] = pair_from_json(field + "." + row0, obj.at(row0), col0, col1);
    table[1] = pair_from_json(field + "." + row1, obj.at(row1), col0, col1);
    return table;
}

json pair_to_json(const std::array<double, 2>& v, const char* first,
                  const char* second) {
    json o = json::object();
    o[first] = v[0];
    o[second] = v[1];
    return o;
}

} // namespace

ProtocolConfig ProtocolConfig::paper_default() {
    ProtocolConfig c;
    const double s12 = std::sqrt(0.5);
    c.a_heads = std::sqrt(1.0 / 3.0);
    c.a_tails = std::sqrt(2.0 / 3.0);
    c.spin_prep_heads = {1.0, 0.0};      // |down>
    c.spin_prep_tails = {s12, s12};      // |right> = (|up>+|down>)/sqrt(2)
    c.f_basis = {{{1.0, 0.0}, {0.0, 1.0}}};
    c.wbar_basis = {{{s12, -s12},        // okbar  = (hbar - tbar)/sqrt(2)
                     {s12, s12}}};       // failsbar = (hbar + tbar)/sqrt(2)
    c.w_basis = {{{s12, -s12},           // ok     = (minus - plus)/sqrt(2)
                  {s12, s12}}};          // fails  = (minus + plus)/sqrt(2)
    c.time_labels = {{"init", experiment::TimePoint::t0},
                     {"fbar", experiment::TimePoint::t1},
                     {"f", experiment::TimePoint::t2},
                     {"wbar", experiment::TimePoint::t3},
                     {"w", experiment::TimePoint::t3}};
    return c;
}

void ProtocolConfig::validate() const {
    check_unit("r_init", a_heads, a_tails);
    check_unit("spin_prep.heads", spin_prep_heads[0], spin_prep_heads[1]);
    check_unit("spin_prep.tails", spin_prep_tails[0], spin_prep_tails[1]);
    check_orthonormal("f_basis", f_basis);
    check_orthonormal("wbar_basis", wbar_basis);
    check_orthonormal("w_basis", w_basis);

    static const char* steps[] = {"init", "fbar", "f", "wbar", "w"};
    for (const char* s : steps)
        if (!time_labels.count(s))
            throw ValidationError("time_labels", std::string("missing step '") + s + "'");
    using experiment::TimePoint;
    const auto at = [&](const char* s) { return time_labels.at(s); };
    if (!(at("init") < at("fbar") && at("fbar") < at("f") && at("f") < at("wbar") &&
          at("wbar") <= at("w")))
        throw ValidationError("time_labels",
                              "steps must be ordered init < fbar < f < wbar <= w");
}

bool ProtocolConfig::is_default() const {
    const ProtocolConfig d = paper_default();
    const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
    auto table_near = [&](const BasisTable& a, const BasisTable& b) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                if (!near(a[i][j], b[i][j])) return false;
        return true;
    };
    return near(a_heads, d.a_heads) && near(a_tails, d.a_tails) &&
           near(spin_prep_heads[0], d.spin_prep_heads[0]) &&
           near(spin_prep_heads[1], d.spin_prep_heads[1]) &&
           near(spin_prep_tails[0], d.spin_prep_tails[0]) &&
           near(spin_prep_tails[1], d.spin_prep_tails[1]) &&
           table_near(f_basis, d.f_basis) && table_near(wbar_basis, d.wbar_basis) &&
           table_near(w_basis, d.w_basis) && time_labels == d.time_labels;
}

std::string ProtocolConfig::canonical_json() const {
    nlohmann::ordered_json o;
    o["r_init"] = pair_to_json({a_heads, a_tails}, "heads", "tails");
    o["spin_prep"] = {
        {"heads", pair_to_json(spin_prep_heads, "down", "up")},
        {"tails", pair_to_json(spin_prep_tails, "down", "up")},
    };
    nlohmann::ordered_json fb;
    fb["down"] = pair_to_json(f_basis[0], "down", "up");
    fb["up"] = pair_to_json(f_basis[1], "down", "up");
    o["f_basis"] = fb;
    nlohmann::ordered_json wb;
    wb["okbar"] = pair_to_json(wbar_basis[0], "hbar", "tbar");
    wb["failsbar"] = pair_to_json(wbar_basis[1], "hbar", "tbar");
    o["wbar_basis"] = wb;
    nlohmann::ordered_json w;
    w["ok"] = pair_to_json(w_basis[0], "minus", "plus");
    w["fails"] = pair_to_json(w_basis[1], "minus", "plus");
    o["w_basis"] = w;
    nlohmann::ordered_json t;
    for (const auto& [step, tp] : time_labels) t[step] = experiment::to_string(tp);
    o["time_labels"] = t;
    return o.dump();
}

std::string ProtocolConfig::hash() const {
    const std::string text = canonical_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double parse_amplitude_string(const std::string& text) {
    std::string body = text;
    double sign = 1.0;
    if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
        if (body[0] == '-') sign = -1.0;
        body.erase(0, 1);
    }
    if (body.rfind("sqrt:", 0) != 0)
        throw std::invalid_argument("expected 'sqrt:p/q' form, got '" + text + "'");
    body.erase(0, 5);
    const auto slash = body.find('/');
    auto parse_uint = [&](const std::string& s) -> std::uint64_t {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed rational in '" + text + "'");
        return std::stoull(s);
    };
    std::uint64_t num, den = 1;
    if (slash == std::string::npos) {
        num = parse_uint(body);
    } else {
        num = parse_uint(body.substr(0, slash));
        den = parse_uint(body.substr(slash + 1));
    }
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return sign * std::sqrt(static_cast<double>(num) / static_cast<double>(den));
}

ProtocolConfig from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(line, col, e.what());
    }
    if (!doc.is_object()) throw ValidationError("<root>", "config must be an object");

    ProtocolConfig c = ProtocolConfig::paper_default();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "r_init") {
            const auto r = pair_from_json("r_init", v, "heads", "tails");
            c.a_heads = r[0];
            c.a_tails = r[1];
        } else if (key == "spin_prep") {
            if (!v.is_object())
                throw ValidationError("spin_prep", "expected an object");
            if (v.contains("heads"))
                c.spin_prep_heads =
                    pair_from_json("spin_prep.heads", v.at("heads"), "down", "up");
            if (v.contains("tails"))
                c.spin_prep_tails =
                    pair_from_json("spin_prep.tails", v.at("tails"), "down", "up");
        } else if (key == "f_basis") {
            c.f_basis = basis_from_json("f_basis", v, "down", "up", "down", "up");
        } else if (key == "wbar_basis") {
            c.wbar_basis =
                basis_from_json("wbar_basis", v, "okbar", "failsbar", "hbar", "tbar");
        } else if (key == "w_basis") {
            c.w_basis = basis_from_json("w_basis", v, "ok", "fails", "minus", "plus");
        } else if (key == "time_labels") {
            if (!v.is_object())
                throw ValidationError("time_labels", "expected an object");
            for (auto jt = v.begin(); jt != v.end(); ++jt) {
                try {
                    c.time_labels[jt.key()] =
                        experiment::timepoint_from_string(jt.value().get<std::string>());
                } catch (const std::exception& e) {
                    throw ValidationError("time_labels." + jt.key(), e.what());
                }
            }
        } else {
            throw ValidationError(key, "unknown config key");
        }
    }
    c.validate();
    return c;
}

ProtocolConfig load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("config", "cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

} // namespace wigner::config
