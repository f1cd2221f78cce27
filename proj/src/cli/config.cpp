#include "qstoch/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace qstoch::cli {

std::string ConfigIssue::message() const {
    std::ostringstream os;
    if (kind == Kind::Parse) {
        os << "parse error";
    } else {
        os << "invalid value";
    }
    if (line > 0) {
        os << " at line " << line << ", column " << column;
    }
    if (!key.empty()) {
        os << " [" << key << "]";
    }
    os << ": " << reason;
    return os.str();
}

namespace {

std::string join_messages(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const ConfigIssue& i : issues) {
        if (!out.empty()) {
            out += "\n";
        }
        out += i.message();
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(join_messages(issues)), issues_(std::move(issues)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::optional<double> parse_real(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

// a, ai, a+bi, a-bi, bi, i, -i
std::optional<Complex> parse_complex(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.back() != 'i') {
        if (auto r = parse_real(s)) {
            return Complex(*r, 0.0);
        }
        return std::nullopt;
    }
    const std::string_view body = s.substr(0, s.size() - 1);
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string_view re_part = split == std::string_view::npos ? std::string_view() : body.substr(0, split);
    std::string_view im_part = split == std::string_view::npos ? body : body.substr(split);
    double re = 0.0;
    if (!re_part.empty()) {
        auto r = parse_real(re_part);
        if (!r) {
            return std::nullopt;
        }
        re = *r;
    }
    double im = 0.0;
    if (im_part.empty() || im_part == "+") {
        im = 1.0;
    } else if (im_part == "-") {
        im = -1.0;
    } else {
        auto r = parse_real(im_part);
        if (!r) {
            return std::nullopt;
        }
        im = *r;
    }
    return Complex(re, im);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
    auto r = parse_real(s);
    if (!r || *r != std::floor(*r) || std::abs(*r) > 9.0e15) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(*r);
}

std::optional<std::uint64_t> parse_seed(std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

const std::set<std::string> kCouplingLabels{"E11", "E12", "E21", "E22"};
const std::set<std::string> kStates{"excited", "ground", "plus", "plus_y", "mixed"};
const std::set<std::string> kVerdicts{"MarkovianStationary", "NonMarkovian", "TimeDependentLindblad",
                                      "DoubleCouplingSameLevel", "CorrelationForbidden"};

std::optional<Matrix> parse_state(const std::string& s, std::string& why) {
    Matrix m = Matrix::Zero(2, 2);
    if (s == "excited") {
        m(0, 0) = 1.0;
    } else if (s == "ground") {
        m(1, 1) = 1.0;
    } else if (s == "plus") {
        m.setConstant(0.5);
    } else if (s == "plus_y") {
        m << Complex(0.5), Complex(0, -0.5), Complex(0, 0.5), Complex(0.5);
    } else if (s == "mixed") {
        m(0, 0) = m(1, 1) = 0.5;
    } else {
        const std::vector<std::string> parts = split_list(s);
        if (parts.size() != 4) {
            why = "expected excited, ground, plus, plus_y, mixed or four entries r11,r12,r21,r22";
            return std::nullopt;
        }
        for (int k = 0; k < 4; ++k) {
            auto c = parse_complex(parts[k]);
            if (!c) {
                why = "entry '" + parts[k] + "' is not a number";
                return std::nullopt;
            }
            m(k / 2, k % 2) = *c;
        }
        try {
            DensityMatrix check(m);
        } catch (const Error& e) {
            why = std::string("not a density matrix: ") + e.what();
            return std::nullopt;
        }
    }
    return m;
}

enum class Kind {
    Real, PositiveReal, NonNegativeReal, Count, PositiveCount, Seed, Coupling, CouplingList,
    PositiveRealList, Complex, State, Formats, Verdict, Boolean, ComplexList4, Text,
};

struct KeySpec {
    std::string name;
    Kind kind;
    bool required;
    std::string fallback;  // default when not required; empty means "absent"
};

using Schema = std::vector<KeySpec>;

const Schema& common_keys() {
    static const Schema s{
        {"experiment", Kind::Text, true, ""},
        {"output", Kind::Text, false, "out"},
        {"formats", Kind::Formats, false, "csv,json"},
    };
    return s;
}

const Schema& schema_for(const std::string& experiment) {
    static const std::map<std::string, Schema> all{
        {"single-coupling",
         {{"coupling", Kind::Coupling, true, ""},
          {"gamma", Kind::PositiveReal, true, ""},
          {"omega0", Kind::Real, true, ""},
          {"t_end", Kind::PositiveReal, true, ""},
          {"seed", Kind::Seed, true, ""},
          {"dt", Kind::PositiveReal, false, "1e-3"},
          {"trajectories", Kind::PositiveCount, false, "10000"},
          {"samples", Kind::PositiveCount, false, "50"},
          {"rho0", Kind::State, false, "excited"},
          {"a_kk", Kind::PositiveReal, false, "1"}}},
        {"double-coupling",
         {{"couplings", Kind::CouplingList, true, ""},
          {"gammas", Kind::PositiveRealList, true, ""},
          {"omega0", Kind::Real, true, ""},
          {"t_end", Kind::PositiveReal, true, ""},
          {"seed", Kind::Seed, true, ""},
          {"a_offdiag", Kind::Complex, false, "0"},
          {"dt", Kind::PositiveReal, false, "1e-3"},
          {"trajectories", Kind::PositiveCount, false, "10000"},
          {"samples", Kind::PositiveCount, false, "50"},
          {"rho0", Kind::State, false, "excited"}}},
        {"markovianity",
         {{"couplings", Kind::CouplingList, true, ""},
          {"gammas", Kind::PositiveRealList, true, ""},
          {"omega0", Kind::Real, true, ""},
          {"a_offdiag", Kind::Complex, false, "0"},
          {"phase_flip", Kind::Boolean, false, "false"},
          {"seed", Kind::Seed, false, "0"},
          {"expect_verdict", Kind::Verdict, false, ""}}},
        {"prop4",
         {{"h11", Kind::Real, true, ""},
          {"h12", Kind::Complex, true, ""},
          {"h22", Kind::Real, true, ""},
          {"ell", Kind::ComplexList4, true, ""},
          {"beta", Kind::ComplexList4, true, ""},
          {"samples", Kind::PositiveCount, false, "50"},
          {"seed", Kind::Seed, false, "0"},
          {"expect_conditions", Kind::Boolean, false, ""}}},
        {"preferred-basis-scan",
         {{"h11", Kind::Real, true, ""},
          {"h12", Kind::Complex, true, ""},
          {"h22", Kind::Real, true, ""},
          {"gamma", Kind::PositiveReal, false, "1"},
          {"theta_points", Kind::PositiveCount, false, "181"},
          {"phi_points", Kind::PositiveCount, false, "181"},
          {"tolerance", Kind::PositiveReal, false, "1e-6"},
          {"seed", Kind::Seed, false, "0"}}},
        {"jaynes-cummings",
         {{"omega0", Kind::Real, true, ""},
          {"omega", Kind::Real, true, ""},
          {"epsilon", Kind::NonNegativeReal, true, ""},
          {"t_end", Kind::PositiveReal, true, ""},
          {"gamma", Kind::NonNegativeReal, false, "1"},
          {"n_initial", Kind::Count, false, "0"},
          {"n_max", Kind::PositiveCount, false, ""},
          {"samples", Kind::PositiveCount, false, "200"},
          {"seed", Kind::Seed, false, "0"}}},
        {"convergence",
         {{"coupling", Kind::Coupling, false, "E21"},
          {"gamma", Kind::PositiveReal, false, "1"},
          {"omega0", Kind::Real, false, "1"},
          {"t", Kind::PositiveReal, false, "1"},
          {"rho0", Kind::State, false, "excited"},
          {"seeds", Kind::PositiveCount, false, "20"},
          {"seed", Kind::Seed, false, "1"},
          {"n_small", Kind::PositiveCount, false, "1000"},
          {"n_large", Kind::PositiveCount, false, "100000"},
          {"ratio_min", Kind::PositiveReal, false, "5"},
          {"ratio_max", Kind::PositiveReal, false, "20"}}},
    };
    static const Schema empty;
    auto it = all.find(experiment);
    return it == all.end() ? empty : it->second;
}

// Empty string when valid, otherwise the reason.
std::string check_value(Kind kind, const std::string& v) {
    switch (kind) {
        case Kind::Text:
            return v.empty() ? "must not be empty" : "";
        case Kind::Real:
            return parse_real(v) ? "" : "must be a number";
        case Kind::PositiveReal: {
            auto r = parse_real(v);
            if (!r) return "must be a number";
            return *r > 0 ? "" : "must be positive";
        }
        case Kind::NonNegativeReal: {
            auto r = parse_real(v);
            if (!r) return "must be a number";
            return *r >= 0 ? "" : "must be non-negative";
        }
        case Kind::Count: {
            auto r = parse_integer(v);
            if (!r) return "must be an integer";
            return *r >= 0 ? "" : "must be non-negative";
        }
        case Kind::PositiveCount: {
            auto r = parse_integer(v);
            if (!r) return "must be an integer";
            return *r > 0 ? "" : "must be positive";
        }
        case Kind::Seed:
            return parse_seed(v) ? "" : "must be an unsigned 64-bit integer";
        case Kind::Coupling:
            return kCouplingLabels.count(v) ? "" : "must be one of E11, E12, E21, E22";
        case Kind::CouplingList: {
            for (const std::string& c : split_list(v)) {
                if (!kCouplingLabels.count(c)) return "'" + c + "' is not one of E11, E12, E21, E22";
            }
            return "";
        }
        case Kind::PositiveRealList: {
            for (const std::string& c : split_list(v)) {
                auto r = parse_real(c);
                if (!r) return "'" + c + "' is not a number";
                if (*r <= 0) return "entries must be positive";
            }
            return "";
        }
        case Kind::Complex:
            return parse_complex(v) ? "" : "must be a complex number such as 0.3+0.1i";
        case Kind::ComplexList4: {
            const auto parts = split_list(v);
            if (parts.size() != 4) return "expected four comma-separated entries";
            for (const std::string& c : parts) {
                if (!parse_complex(c)) return "'" + c + "' is not a complex number";
            }
            return "";
        }
        case Kind::State: {
            std::string why;
            return parse_state(v, why) ? "" : why;
        }
        case Kind::Formats: {
            for (const std::string& f : split_list(v)) {
                if (f != "csv" && f != "json") return "formats are csv and json";
            }
            return "";
        }
        case Kind::Verdict:
            return kVerdicts.count(v) ? "" : "unknown verdict";
        case Kind::Boolean:
            return (v == "true" || v == "false") ? "" : "must be true or false";
    }
    return "";
}

struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;      // of the value
    std::size_t key_column = 0;
};

std::string suggestion(const std::string& key, const Schema& schema) {
    std::string best;
    std::size_t best_d = 3;
    auto consider = [&](const std::string& name) {
        const std::size_t d = edit_distance(key, name);
        if (d < best_d) {
            best_d = d;
            best = name;
        }
    };
    for (const KeySpec& k : common_keys()) consider(k.name);
    for (const KeySpec& k : schema) consider(k.name);
    return best.empty() ? "" : " (did you mean '" + best + "'?)";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const Overrides& overrides) {
    std::vector<ConfigIssue> issues;
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const std::size_t hash = raw.find('#');
        const std::string_view body = raw.substr(0, hash);
        if (trim(body).empty()) {
            continue;
        }
        const std::size_t eq = body.find('=');
        const std::size_t first = body.find_first_not_of(" \t") + 1;
        if (eq == std::string_view::npos) {
            issues.push_back({ConfigIssue::Kind::Parse, line_no, first, "", "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            issues.push_back({ConfigIssue::Kind::Parse, line_no, first, "", "missing key before '='"});
            continue;
        }
        const bool key_ok = std::all_of(key.begin(), key.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
        });
        if (!key_ok) {
            issues.push_back({ConfigIssue::Kind::Parse, line_no, first, key, "key may only contain letters, digits, '_' and '-'"});
            continue;
        }
        if (value.empty()) {
            issues.push_back({ConfigIssue::Kind::Parse, line_no, eq + 2, key, "missing value after '='"});
            continue;
        }
        if (entries.count(key)) {
            issues.push_back({ConfigIssue::Kind::Parse, line_no, first, key,
                              "duplicate key (first set on line " + std::to_string(entries[key].line) + ")"});
            continue;
        }
        const std::size_t vcol = body.find_first_not_of(" \t", eq + 1) + 1;
        entries[key] = {value, line_no, vcol, first};
        order.push_back(key);
    }

    auto put_override = [&](const std::string& key, const std::string& value) {
        entries[key] = {value, 0, 0, 0};
    };
    if (overrides.output) put_override("output", *overrides.output);
    if (overrides.seed) put_override("seed", std::to_string(*overrides.seed));
    if (overrides.trajectories) put_override("trajectories", std::to_string(*overrides.trajectories));
    if (overrides.formats) put_override("formats", *overrides.formats);

    ExperimentConfig cfg;
    const auto exp_it = entries.find("experiment");
    if (exp_it == entries.end()) {
        issues.push_back({ConfigIssue::Kind::Validation, 0, 0, "experiment", "required key is missing"});
    } else {
        cfg.experiment = exp_it->second.value;
        const auto& names = experiment_names();
        if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
            std::string hint;
            for (const std::string& n : names) {
                if (edit_distance(n, cfg.experiment) <= 3) {
                    hint = " (did you mean '" + n + "'?)";
                    break;
                }
            }
            issues.push_back({ConfigIssue::Kind::Validation, exp_it->second.line, exp_it->second.column,
                              "experiment", "unknown experiment '" + cfg.experiment + "'" + hint});
            throw ConfigError(std::move(issues));
        }
    }
    const Schema& schema = schema_for(cfg.experiment);

    auto spec_of = [&](const std::string& key) -> const KeySpec* {
        for (const KeySpec& k : common_keys()) if (k.name == key) return &k;
        for (const KeySpec& k : schema) if (k.name == key) return &k;
        return nullptr;
    };

    for (const auto& [key, entry] : entries) {
        const KeySpec* spec = spec_of(key);
        if (!spec) {
            std::string reason = "unknown key";
            if (!cfg.experiment.empty()) reason += " for experiment '" + cfg.experiment + "'";
            issues.push_back({ConfigIssue::Kind::Validation, entry.line, entry.key_column, key,
                              reason + suggestion(key, schema)});
            continue;
        }
        const std::string why = check_value(spec->kind, entry.value);
        if (!why.empty()) {
            issues.push_back({ConfigIssue::Kind::Validation, entry.line, entry.column, key, why});
            continue;
        }
        cfg.parameters[key] = entry.value;
    }
    for (const Schema* s : {&common_keys(), &schema}) {
        for (const KeySpec& k : *s) {
            if (entries.count(k.name)) continue;
            if (k.required) {
                issues.push_back({ConfigIssue::Kind::Validation, 0, 0, k.name, "required key is missing"});
            } else if (!k.fallback.empty()) {
                cfg.parameters[k.name] = k.fallback;
            }
        }
    }

    // cross-key rules
    auto issue_at = [&](const std::string& key, std::string reason) {
        const auto it = entries.find(key);
        const std::size_t line = it == entries.end() ? 0 : it->second.line;
        const std::size_t col = it == entries.end() ? 0 : it->second.column;
        issues.push_back({ConfigIssue::Kind::Validation, line, col, key, std::move(reason)});
    };
    auto valid = [&](const std::string& key) { return cfg.parameters.count(key) != 0; };
    if (valid("couplings") && valid("gammas")) {
        const auto cs = split_list(cfg.parameters["couplings"]);
        const auto gs = split_list(cfg.parameters["gammas"]);
        if (cs.size() != gs.size()) {
            issue_at("gammas", "needs one rate per coupling (" + std::to_string(cs.size()) + ")");
        }
        if (cfg.experiment == "double-coupling" && cs.size() != 2) {
            issue_at("couplings", "double-coupling takes exactly two couplings");
        }
        if (cs.empty() || cs.size() > 4) {
            issue_at("couplings", "between one and four couplings");
        }
        if (valid("a_offdiag") && *parse_complex(cfg.parameters["a_offdiag"]) != Complex(0.0) && cs.size() != 2) {
            issue_at("a_offdiag", "correlation is defined for exactly two couplings");
        }
    }
    if (valid("a_offdiag") && valid("couplings")) {
        // a must stay a covariance: |a_12| <= 1 with unit diagonal
        if (std::abs(*parse_complex(cfg.parameters["a_offdiag"])) > 1.0 + 1e-12) {
            issue_at("a_offdiag", "|a_offdiag| must not exceed 1");
        }
    }
    if (valid("dt") && valid("t_end") && *parse_real(cfg.parameters["dt"]) > *parse_real(cfg.parameters["t_end"])) {
        issue_at("dt", "must not exceed t_end");
    }
    if (cfg.experiment == "jaynes-cummings" && valid("n_initial")) {
        const auto n0 = *parse_integer(cfg.parameters["n_initial"]);
        if (!valid("n_max") && !entries.count("n_max")) {
            cfg.parameters["n_max"] = std::to_string(n0 + 8);
        } else if (valid("n_max") && *parse_integer(cfg.parameters["n_max"]) <= n0) {
            issue_at("n_max", "must exceed n_initial");
        }
    }
    if (cfg.experiment == "convergence" && valid("n_small") && valid("n_large") &&
        *parse_integer(cfg.parameters["n_small"]) >= *parse_integer(cfg.parameters["n_large"])) {
        issue_at("n_large", "must exceed n_small");
    }
    if (cfg.experiment == "convergence" && valid("ratio_min") && valid("ratio_max") &&
        *parse_real(cfg.parameters["ratio_min"]) >= *parse_real(cfg.parameters["ratio_max"])) {
        issue_at("ratio_max", "must exceed ratio_min");
    }
    if (cfg.experiment == "preferred-basis-scan" && valid("theta_points") &&
        *parse_integer(cfg.parameters["theta_points"]) < 2) {
        issue_at("theta_points", "need at least 2 points");
    }

    if (!issues.empty()) {
        std::stable_sort(issues.begin(), issues.end(), [](const ConfigIssue& a, const ConfigIssue& b) {
            return (a.line == 0 ? SIZE_MAX : a.line) < (b.line == 0 ? SIZE_MAX : b.line);
        });
        throw ConfigError(std::move(issues));
    }
    cfg.output = cfg.parameters.at("output");
    cfg.formats = split_list(cfg.parameters.at("formats"));
    return cfg;
}

bool ExperimentConfig::wants(std::string_view format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

const std::string& ExperimentConfig::text(const std::string& key) const {
    auto it = parameters.find(key);
    if (it == parameters.end()) {
        throw InvalidArgument("config: key '" + key + "' is not set");
    }
    return it->second;
}

double ExperimentConfig::real(const std::string& key) const { return *parse_real(text(key)); }

std::int64_t ExperimentConfig::integer(const std::string& key) const { return *parse_integer(text(key)); }

std::uint64_t ExperimentConfig::seed() const { return *parse_seed(text("seed")); }

Complex ExperimentConfig::complex(const std::string& key) const { return *parse_complex(text(key)); }

std::vector<std::string> ExperimentConfig::list(const std::string& key) const { return split_list(text(key)); }

std::vector<double> ExperimentConfig::real_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& s : list(key)) out.push_back(*parse_real(s));
    return out;
}

std::vector<Complex> ExperimentConfig::complex_list(const std::string& key) const {
    std::vector<Complex> out;
    for (const std::string& s : list(key)) out.push_back(*parse_complex(s));
    return out;
}

bool ExperimentConfig::boolean(const std::string& key) const { return text(key) == "true"; }

Matrix ExperimentConfig::state(const std::string& key) const {
    std::string why;
    return *parse_state(text(key), why);
}

}  // namespace qstoch::cli
