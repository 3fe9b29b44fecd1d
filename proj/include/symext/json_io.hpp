// JSON readers/writers for the on-disk formats: density matrices, Bell
// weight vectors, Kraus channels, decisions, witness blocks and SDP dumps.
#pragma once

#include <string>

#include "json.hpp"

#include "symext/analytic.hpp"
#include "symext/bell.hpp"
#include "symext/quantum_core.hpp"
#include "symext/sdp.hpp"
#include "symext/witnesses.hpp"

namespace symext::io {

using json = nlohmann::json;

json to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const json& j);

json to_json(const bell::BellDiagonalDistribution& s);
bell::BellDiagonalDistribution bell_from_json(const json& j);

json to_json(const QuantumChannel& channel);
QuantumChannel channel_from_json(const json& j);

json to_json(const analytic::Decision& d);

json to_json(const witnesses::WitnessBlock& block);

json to_json(const sdp::SdpInequality& problem);
json to_json(const sdp::SdpSolution& solution);

// Parses any of the state/channel documents by the "type" field.
json load_file(const std::string& path);

}  // namespace symext::io
