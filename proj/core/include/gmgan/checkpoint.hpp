#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gmgan/adam.hpp"
#include "gmgan/gan.hpp"
#include "gmgan/mixture.hpp"
#include "gmgan/mlp.hpp"

namespace gmgan {

// Checkpoints are structured-text (JSON) documents. Doubles are written in
// shortest round-trip form, so write -> read -> write is byte-identical for
// finite values. Field order is fixed (ordered_json) for the same reason.
using Json = nlohmann::ordered_json;

inline constexpr int kCheckpointVersion = 1;

Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);

Json params_to_json(const ParamStore& p);
ParamStore params_from_json(const Json& j);

Json mlp_spec_to_json(const MlpSpec& s);
MlpSpec mlp_spec_from_json(const Json& j);

Json prior_to_json(const MixturePrior& p);
MixturePrior prior_from_json(const Json& j);

Json gan_to_json(const GanModel& m);
GanModel gan_from_json(const Json& j);

Json adam_to_json(const AdamState& s);
AdamState adam_from_json(const Json& j);

// Wraps `body` with {format_version, kind} and writes it. Reading validates
// both fields and throws FormatError on mismatch or parse failure.
void write_checkpoint(const std::filesystem::path& path, const std::string& kind, Json body);
Json read_checkpoint(const std::filesystem::path& path, const std::string& kind);

}  // namespace gmgan
