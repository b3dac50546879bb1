#pragma once

#include <nlohmann/json_fwd.hpp>

#include "levydrift/model.hpp"

namespace levydrift {

// {"type": "compound_poisson", "intensity": λ, "jump_law": {"type": "exponential", "rate": η},
//  "sign": "positive"|"two_sided"}, {"type": "alpha_stable", "alpha", "scale"},
// {"type": "tempered_stable", "alpha", "tempering", "normalizer"}, {"type": "none"}.
// A plain string in the CLI grammar is accepted on input as well.
nlohmann::json levy_to_json(const LevySpec& levy);
LevySpec levy_from_json(const nlohmann::json& j);

// {"name", "sigma", "levy", "bounds": [[lo, hi], ...]}
nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

}  // namespace levydrift
