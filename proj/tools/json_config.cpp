#include "json_config.hpp"

#include <istream>

#include "json.hpp"

namespace pcsisac::cli {

namespace {

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError("config: nested objects are not supported");
}

std::vector<std::string> leaf_path(const CLI::App* root) {
    std::vector<std::string> path;
    for (const CLI::App* app = root;;) {
        const auto subs = app->get_subcommands();
        if (subs.empty()) break;
        app = subs.front();
        path.push_back(app->get_name());
    }
    return path;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
    nlohmann::json out = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
        if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
        const auto& name = opt->get_lnames().front();
        if (opt->count() > 0)
            out[name] = opt->as<std::string>();
        else if (default_also && !opt->get_default_str().empty())
            out[name] = opt->get_default_str();
    }
    return out.dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");

    const auto parents = leaf_path(root_);
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
        CLI::ConfigItem item;
        item.parents = parents;
        item.name = key;
        if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar_text(v);
            item.inputs.push_back(joined);
        } else {
            item.inputs.push_back(scalar_text(value));
        }
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace pcsisac::cli
