#pragma once

// JSON forms of loops, lifts, sections, half-weights, tangents and fit reports.

#include "json.hpp"

#include "bpulab/asymptotics.hpp"
#include "bpulab/geometry.hpp"
#include "bpulab/hardy.hpp"
#include "bpulab/leaf.hpp"

namespace bpulab::io {

using nlohmann::json;

/// {"N", "c"?, "nodes": [[re z0, im z0, re z1, im z1], ...]}
json loop_to_json(const geometry::LagrangianLoop& loop);
geometry::LoopHandle loop_from_json(const json& j);

/// {"N", "r", "holonomy": [re, im], "nodes": [...]} with r * N nodes.
json lift_to_json(const geometry::PlanckianLift& lift);

/// {"k", "coefficients": [[re, im], ...]}
json section_to_json(const hardy::SectionVector& v);
hardy::SectionVector section_from_json(const json& j);

/// Sample arrays keyed by node index order.
json half_weight_to_json(const leaf::HalfWeight& h);
json tangent_to_json(const leaf::LeafTangent& w);
leaf::LeafTangent tangent_from_json(const json& j, const geometry::LoopHandle& loop);

/// {"alpha", "m", "coefficients", "residual", "condition", "k_min", "k_max"}
json fit_to_json(const asymptotics::ExpansionFit& fit);
/// {"alpha", "m", "predicted_slope", "slope", "nearest_rung", "inconclusive", "within_band", "pass"}
json ladder_to_json(const asymptotics::LadderReport& rep);

}  // namespace bpulab::io
