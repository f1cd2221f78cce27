#pragma once

// Flat `key = value` experiment configuration. `#` starts a comment, keys are
// case-sensitive, every problem in a document is reported together.

#include "qstoch/errors.hpp"
#include "qstoch/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qstoch::cli {

struct ConfigIssue {
    enum class Kind { Parse, Validation };
    Kind kind = Kind::Validation;
    std::size_t line = 0;    // 1-based, 0 when not tied to a line
    std::size_t column = 0;  // 1-based
    std::string key;
    std::string reason;

    std::string message() const;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"single-coupling", "double-coupling", "markovianity",
                                                "prop4", "preferred-basis-scan", "jaynes-cummings",
                                                "convergence"};
    return names;
}

// Command-line values that replace config keys before validation.
struct Overrides {
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trajectories;
    std::optional<std::string> formats;
};

struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> parameters;  // validated, defaults filled
    std::string output = "out";
    std::vector<std::string> formats{"csv", "json"};

    bool has(const std::string& key) const { return parameters.count(key) != 0; }
    bool wants(std::string_view format) const;
    const std::string& text(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t seed() const;
    Complex complex(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;
    std::vector<Complex> complex_list(const std::string& key) const;
    bool boolean(const std::string& key) const;
    Matrix state(const std::string& key) const;  // density matrix key
};

// Throws ConfigError listing every parse and validation problem.
ExperimentConfig parse_config(std::string_view text, const Overrides& overrides = {});

// Value grammars, exposed for tests.
std::optional<double> parse_real(std::string_view s);
std::optional<Complex> parse_complex(std::string_view s);
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace qstoch::cli
