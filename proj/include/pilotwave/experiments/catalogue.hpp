// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file catalogue.hpp
 * @brief Wavefunction constructors available to scenario files.
 */

#pragma once

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace pilotwave::experiments {

struct ModelParameter {
    std::string name;
    std::string description;
};

struct ModelInfo {
    std::string name;
    std::string summary;
    std::vector<ModelParameter> parameters;
    std::vector<std::string> symmetry_tags;
};

inline std::vector<ModelInfo> list_models() {
    return {
        {"gaussian_packet",
         "free Gaussian packet in d dimensions, one particle",
         {{"center", "initial center, length d"},
          {"momentum", "mean momentum, length d"},
          {"width", "position spread sigma > 0"},
          {"mass", "particle mass > 0"}},
         {"none"}},
        {"oscillator",
         "isotropic harmonic-oscillator eigenstate, one particle",
         {{"levels", "quantum number per axis, length d"},
          {"frequency", "angular frequency > 0"},
          {"mass", "particle mass > 0"}},
         {"none"}},
        {"product",
         "product of single-particle states",
         {{"factors", "list of gaussian_packet or oscillator states"}},
         {"none"}},
        {"symmetrized",
         "normalised bosonic symmetrisation of a product",
         {{"factors", "list of single-particle states with equal masses"}},
         {"symmetric"}},
        {"antisymmetrized",
         "normalised fermionic antisymmetrisation of a product",
         {{"factors", "list of single-particle states with equal masses"}},
         {"antisymmetric"}},
        {"superposition",
         "normalised linear combination of states sharing N, d and symmetry",
         {{"terms", "list of {coefficient, state}; coefficient is a number or [re, im]"}},
         {"inherited from the terms"}},
        {"anyon_pair",
         "two identical anyons in a planar harmonic trap, relative state r^|l| e^{i l phi} e^{-mu w r^2 / 2}",
         {{"nu", "statistics parameter in [0, 2)"},
          {"k", "integer winding offset, l = nu + 2k"},
          {"frequency", "trap frequency > 0"},
          {"mass", "particle mass > 0"}},
         {"anyonic"}},
        {"time_reversed",
         "conjugated state evolved backwards about a pivot time",
         {{"state", "any state"}, {"pivot", "reversal time"}},
         {"inherited from the state"}},
    };
}

inline nlohmann::ordered_json models_json() {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& m : list_models()) {
        nlohmann::ordered_json j;
        j["name"] = m.name;
        j["summary"] = m.summary;
        j["parameters"] = nlohmann::ordered_json::array();
        for (const auto& p : m.parameters) j["parameters"].push_back({{"name", p.name}, {"description", p.description}});
        j["symmetry"] = m.symmetry_tags;
        out.push_back(j);
    }
    return out;
}

inline std::string models_text() {
    std::ostringstream os;
    for (const auto& m : list_models()) {
        os << m.name << "  [";
        for (std::size_t i = 0; i < m.symmetry_tags.size(); ++i) os << (i ? ", " : "") << m.symmetry_tags[i];
        os << "]\n    " << m.summary << "\n";
        for (const auto& p : m.parameters) os << "    - " << p.name << ": " << p.description << "\n";
    }
    return os.str();
}

}  // namespace pilotwave::experiments
