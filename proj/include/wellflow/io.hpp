#pragma once

#include <json.hpp>

#include "wellflow/adapted.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/potential.hpp"
#include "wellflow/turing.hpp"
#include "wellflow/well.hpp"

namespace wellflow {

using nlohmann::json;

std::string rat_to_string(const Rat& r);  // "p/q" (or "p" when q = 1)
Rat rat_from_string(const std::string& s);

json trigpoly_to_json(const TrigPoly& f);
TrigPoly trigpoly_from_json(const json& j, int dim);

// {dim, components: [[[k...], cos, sin], ...] per component}
json flow_to_json(const TorusFlow& flow);
TorusFlow flow_from_json(const json& j);

// same shape plus a "form" tag
json form_to_json(const OneForm& theta);
OneForm form_from_json(const json& j);

json potential_to_json(const Potential& V);
PotentialPtr potential_from_json(const json& j);

// {states, start, halt, k, delta: [[q, t, q', t', eps], ...]} with states
// by name
json tm_to_json(const TuringMachine& tm);
TuringMachine tm_from_json(const json& j);

json tape_to_json(const Tape& t);
Tape tape_from_json(const json& j);

json certificate_to_json(const AdaptedLP& lp, const AdaptedCertificate& cert);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_well_csv(std::ostream& os, const WellTrajectory& tr);
void write_orbit_csv(std::ostream& os,
                     const std::vector<std::pair<Rat2, TapePoint>>& orbit);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace wellflow
