#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "pwalk/chain_spec.hpp"
#include "pwalk/cycle_path.hpp"

namespace pwalk {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write '" + path + "'");
    out << content;
}

using ChainSpecVariant = std::variant<AxisChainSpec, MembraneWalkSpec, SpiderWalkSpec>;

inline ChainSpecVariant chain_spec_from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "axis") return AxisChainSpec::from_json(j);
    if (type == "membrane") return MembraneWalkSpec::from_json(j);
    if (type == "spider") return SpiderWalkSpec::from_json(j);
    throw SpecError("unknown chain spec type '" + type + "'");
}

inline ChainSpecVariant load_chain_spec(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("spec file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return chain_spec_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("spec file '" + path + "' is malformed: " + e.what());
    }
}

/// Exports a simulated path as CSV: step,value,label (label blank-equivalent 0
/// for membrane walks).
inline std::string path_to_csv(const CyclePath& path) {
    std::ostringstream out;
    out << "step," << (path.kind == ChainKind::Membrane ? "x" : "R") << ",label\n";
    for (std::size_t k = 0; k < path.radius.size(); ++k)
        out << k << ',' << path.radius[k] << ',' << static_cast<int>(path.label[k]) << '\n';
    return out.str();
}

} // namespace pwalk
