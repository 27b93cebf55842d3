#include "mdtlab/rl/agent.hpp"

#include <cstring>

#include "mdtlab/error.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::rl {

void Agent::require_unfrozen(const char* what) const {
  if (frozen_) throw ProtocolError(std::string(what) + ": learnable state of a frozen model cannot be modified");
}

nlohmann::json checkpoint_header(std::string_view kind) {
  return {{"schema", kCheckpointSchema}, {"kind", kind}};
}

void check_checkpoint(const nlohmann::json& j, std::string_view kind) {
  if (j.value("schema", "") != kCheckpointSchema)
    throw SchemaError("checkpoint: expected schema '" + std::string(kCheckpointSchema) + "'");
  if (j.value("kind", "") != kind)
    throw SchemaError("checkpoint: expected kind '" + std::string(kind) + "', got '" +
                      j.value("kind", "") + "'");
}

std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t seed) {
  std::string bytes(v.size() * sizeof(double), '\0');
  if (!v.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
  return mix64(seed ^ fnv1a64(bytes));
}

}  // namespace mdtlab::rl
