// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: INI configuration with per-module sections,
// `--set section.key=value` overrides, and the analyze / simulate /
// optimize / sweep / verify workflows writing CSV files into --out.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace covert::cli {

enum ExitCode : int {
    kOk = 0,
    kInfeasible = 1,
    kInvalidInput = 2,
    kInternalError = 3,
};

/// Flat "section.key" -> value view of a configuration.
class Config {
public:
    /// Every documented key at its default value.
    static Config defaults();

    /// Merges an INI file; unknown sections or keys raise InvalidArgument.
    void load_file(const std::filesystem::path& path);
    /// Applies one "section.key=value" override.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    bool flag(const std::string& key) const;

    /// INI text with sections and keys in a fixed order.
    std::string to_ini() const;

private:
    std::map<std::string, std::string> values_;
};

/// Parses `args` (without the program name), runs the chosen subcommand
/// and returns its exit code. Diagnostics go to `err`, usage to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Number formatting shared by every CSV column: 15 significant digits.
std::string format_number(double x);

}  // namespace covert::cli
