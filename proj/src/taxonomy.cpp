#include "gts/taxonomy.hpp"

#include "gts/error.hpp"

#include <algorithm>

namespace gts::taxonomy {

const std::vector<std::string>& categories() {
    static const std::vector<std::string> names{
        "Fire",        "Arson",          "Burning",         "Smoke",           "Stealing",
        "Burglary",    "Robbery",        "Shoplifting",     "Fighting",        "Assault",
        "Abuse",       "Riots",          "Road Accident",   "Traffic Violation", "Pedestrian Incident",
        "Explosion",   "Vandalism",      "Water Incident",  "Animal Hurting",  "Shooting",
        "Arrest"};
    return names;
}

const std::vector<std::string>& labels() {
    static const std::vector<std::string> all = [] {
        auto v = categories();
        v.emplace_back(normal);
        return v;
    }();
    return all;
}

bool is_category(std::string_view name) {
    const auto& c = categories();
    return std::find(c.begin(), c.end(), name) != c.end();
}

bool is_label(std::string_view name) { return name == normal || is_category(name); }

void validate_phrase_bank(const PhraseBank& bank) {
    for (const auto& [key, phrases] : bank) {
        if (!is_category(key)) throw ConfigError("phrase bank: unknown category '" + key + "'");
        for (const auto& p : phrases)
            if (p.empty()) throw ConfigError("phrase bank: empty phrase under '" + key + "'");
    }
}

}  // namespace gts::taxonomy
