#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pairiv/model.hpp"

namespace pairiv {

// Declarative process description. Top-level keys:
//   groups        int
//   seed          unsigned (optional; the CLI --seed flag is the fallback)
//   joint_types   {"marginals": [AT,SC,C,GC,NT]} for independent types, or
//                 {"table": [[..5 doubles..] x5]} for an explicit joint table
//   outcome_mean  {"default": v, "entries": [ {own,peer,d,(value|add)} ... ]}
//                 own/peer are type names or "*"; d is [d_own, d_peer] with
//                 0, 1 or "*"; entries apply in order, "add" increments
//   noise         {"family": "none"|"gaussian"|"bernoulli",
//                  "scale": s, "rho": r}
//   design        {"p00": ., "p10": ., "p01": ., "p11": .}
//   strata        optional [ {label, share, joint_types?, outcome_mean?,
//                  noise?, design?} ... ]; missing sections inherit the
//                  top level
struct ParsedDgp {
    DgpSpec spec;
    bool has_seed = false;
    std::vector<std::string> warnings;
};

ParsedDgp dgp_from_json(const std::string& text);
ParsedDgp dgp_from_file(const std::filesystem::path& path);

}  // namespace pairiv
