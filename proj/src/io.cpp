#include "bpulab/io.hpp"

#include "bpulab/errors.hpp"

namespace bpulab::io {

namespace {

json node_array(std::span<const geometry::C2> pts) {
  json a = json::array();
  for (const auto& z : pts) a.push_back({z(0).real(), z(0).imag(), z(1).real(), z(1).imag()});
  return a;
}

}  // namespace

json loop_to_json(const geometry::LagrangianLoop& loop) {
  json j;
  j["N"] = loop.size();
  if (loop.area_coordinate()) j["c"] = *loop.area_coordinate();
  j["nodes"] = node_array(loop.reps());
  return j;
}

geometry::LoopHandle loop_from_json(const json& j) {
  const auto& nodes = j.at("nodes");
  std::vector<geometry::C2> reps;
  for (const auto& n : nodes) {
    if (n.size() != 4) throw DomainError("loop_from_json: node needs four numbers");
    reps.emplace_back(std::complex<double>(n[0].get<double>(), n[1].get<double>()),
                      std::complex<double>(n[2].get<double>(), n[3].get<double>()));
  }
  if (j.contains("N") && j.at("N").get<std::size_t>() != reps.size())
    throw DomainError("loop_from_json: N does not match the node count");
  std::optional<double> c;
  if (j.contains("c")) c = j.at("c").get<double>();
  return std::make_shared<const geometry::LagrangianLoop>(std::move(reps), c);
}

json lift_to_json(const geometry::PlanckianLift& lift) {
  json j;
  j["N"] = lift.nodes_per_circuit();
  j["r"] = lift.winding;
  j["holonomy"] = {lift.holonomy.real(), lift.holonomy.imag()};
  if (lift.base->area_coordinate()) j["c"] = *lift.base->area_coordinate();
  j["nodes"] = node_array(lift.points);
  return j;
}

json section_to_json(const hardy::SectionVector& v) {
  json c = json::array();
  for (const auto& x : v.coefficients) c.push_back({x.real(), x.imag()});
  return json{{"k", v.k}, {"coefficients", c}};
}

hardy::SectionVector section_from_json(const json& j) {
  auto v = hardy::SectionVector::zero(j.at("k").get<int>());
  const auto& c = j.at("coefficients");
  if (c.size() != v.coefficients.size()) throw DomainError("section_from_json: expected k + 1 coefficients");
  for (std::size_t a = 0; a < c.size(); ++a) v.coefficients[a] = {c[a].at(0).get<double>(), c[a].at(1).get<double>()};
  return v;
}

json half_weight_to_json(const leaf::HalfWeight& h) {
  return json{{"N", h.samples().size()}, {"S", std::vector<double>(h.samples().begin(), h.samples().end())}};
}

json tangent_to_json(const leaf::LeafTangent& w) {
  return json{{"N", w.f.size()}, {"f", w.f}, {"S_l", w.s_l}, {"constrained", w.constrained}};
}

leaf::LeafTangent tangent_from_json(const json& j, const geometry::LoopHandle& loop) {
  leaf::LeafTangent w{loop, j.at("f").get<std::vector<double>>(), j.at("S_l").get<std::vector<double>>(),
                      j.value("constrained", false)};
  if (w.f.size() != loop->size() || w.s_l.size() != loop->size())
    throw DomainError("tangent_from_json: sample count does not match the loop");
  return w;
}

json fit_to_json(const asymptotics::ExpansionFit& fit) {
  return json{{"alpha", fit.alpha},         {"m", fit.m},  {"step", fit.step},         {"coefficients", fit.coefficients},
              {"residual", fit.residual},   {"condition", fit.condition}, {"k_min", fit.k_min},
              {"k_max", fit.k_max}};
}

json ladder_to_json(const asymptotics::LadderReport& rep) {
  return json{{"alpha", rep.alpha},
              {"m", rep.m},
              {"step", rep.step},
              {"predicted_slope", rep.predicted_slope},
              {"slope", rep.slope},
              {"nearest_rung", rep.nearest_rung},
              {"inconclusive", rep.inconclusive},
              {"within_band", rep.within_band},
              {"pass", rep.pass}};
}

}  // namespace bpulab::io
