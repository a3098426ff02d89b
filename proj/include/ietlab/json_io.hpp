#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ietlab/diagnostics.hpp"
#include "ietlab/iet.hpp"
#include "ietlab/rauzy.hpp"
#include "ietlab/rigidity.hpp"
#include "ietlab/roof.hpp"

namespace ietlab {

using Json = nlohmann::json;

Json iet_to_json(const Iet& t);
Json iet_to_json(const RatIet& t);
Iet iet_from_json(const Json& j);
RatIet rat_iet_from_json(const Json& j);
bool json_iet_is_exact(const Json& j);

Json roof_to_json(const SymLogRoof& f);
SymLogRoof roof_from_json(const Json& j, const std::vector<double>& endpoints);

template <class S>
Json trace_to_json(const BasicRauzyTrace<S>& trace, bool with_matrices = true);

Json certificate_to_json(const RigidityCertificate& c, double tol_eq = 1e-12);
Json resonance_to_json(const ResonanceCertificate& c);
Json tail_report_to_json(const TailReport& r);
Json sample_set_to_json(const CenteredSampleSet& s, bool with_samples = false);
Json tightness_to_json(const TightnessReport& r);
Json shearing_to_json(const ShearingReport& r);

std::string dump_canonical(const Json& j);
void write_text_file(const std::string& path, const std::string& content);

} // namespace ietlab
