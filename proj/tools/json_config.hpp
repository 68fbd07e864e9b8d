#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace pcsisac::cli {

/// Reads a flat JSON object of flag values, {"trials": 500, "c0": [1.0, 1.32]},
/// and applies it to the subcommand chosen on the command line. Arrays are
/// joined with commas, matching the grid/list syntax of the flags. Values given
/// on the command line win over the file.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(const CLI::App* root) : root_(root) {}

    std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                          std::string prefix) const override;
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

private:
    const CLI::App* root_;
};

}  // namespace pcsisac::cli
