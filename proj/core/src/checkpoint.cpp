#include "gmgan/checkpoint.hpp"

#include <fstream>

namespace gmgan {

Json tensor_to_json(const Tensor& t) {
  Json j;
  j["shape"] = t.shape;
  j["values"] = t.v;
  return j;
}

Tensor tensor_from_json(const Json& j) {
  try {
    std::vector<int64_t> shape = j.at("shape").get<std::vector<int64_t>>();
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    return Tensor(std::move(shape), std::move(values));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad tensor record: ") + e.what());
  }
}

Json params_to_json(const ParamStore& p) {
  Json j = Json::array();
  for (const auto& [name, t] : p) {
    Json entry;
    entry["name"] = name;
    entry["shape"] = t.shape;
    entry["values"] = t.v;
    j.push_back(std::move(entry));
  }
  return j;
}

ParamStore params_from_json(const Json& j) {
  ParamStore p;
  try {
    for (const auto& entry : j) {
      Tensor t(entry.at("shape").get<std::vector<int64_t>>(),
               entry.at("values").get<std::vector<double>>());
      p.add(entry.at("name").get<std::string>(), std::move(t));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad parameter store record: ") + e.what());
  }
  return p;
}

namespace {

std::string act_name(Act a) {
  switch (a) {
    case Act::Identity:
      return "identity";
    case Act::LeakyRelu:
      return "leaky_relu";
    case Act::Tanh:
      return "tanh";
    case Act::Sigmoid:
      return "sigmoid";
  }
  return "identity";
}

Act act_from_name(const std::string& s) {
  if (s == "identity") return Act::Identity;
  if (s == "leaky_relu") return Act::LeakyRelu;
  if (s == "tanh") return Act::Tanh;
  if (s == "sigmoid") return Act::Sigmoid;
  throw FormatError("unknown activation '" + s + "'");
}

}  // namespace

Json mlp_spec_to_json(const MlpSpec& s) {
  Json j;
  j["widths"] = s.widths;
  Json acts = Json::array();
  for (Act a : s.acts) acts.push_back(act_name(a));
  j["activations"] = std::move(acts);
  j["leaky_slope"] = s.leaky_slope;
  return j;
}

MlpSpec mlp_spec_from_json(const Json& j) {
  MlpSpec s;
  try {
    s.widths = j.at("widths").get<std::vector<int64_t>>();
    for (const auto& a : j.at("activations")) s.acts.push_back(act_from_name(a.get<std::string>()));
    s.leaky_slope = j.at("leaky_slope").get<double>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad mlp spec record: ") + e.what());
  }
  s.validate();
  return s;
}

Json prior_to_json(const MixturePrior& p) {
  Json j;
  j["components"] = p.components();
  j["dim"] = p.dim();
  j["weights"] = p.weights();
  j["dynamic"] = p.dynamic();
  j["mu"] = tensor_to_json(p.means());
  j["factor"] = tensor_to_json(p.factors());
  return j;
}

MixturePrior prior_from_json(const Json& j) {
  try {
    return MixturePrior::from_parts(j.at("components").get<int64_t>(), j.at("dim").get<int64_t>(),
                                    j.at("weights").get<std::vector<double>>(),
                                    tensor_from_json(j.at("mu")), tensor_from_json(j.at("factor")),
                                    j.at("dynamic").get<bool>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad prior record: ") + e.what());
  }
}

Json gan_to_json(const GanModel& m) {
  Json j;
  j["mode"] = m.mode == GanMode::Supervised ? "supervised" : "unsupervised";
  j["n_classes"] = m.n_classes;
  j["label_map"] = m.f.table;
  j["out_scale"] = m.out_scale;
  j["generator_spec"] = mlp_spec_to_json(m.gen_spec);
  j["generator_params"] = params_to_json(m.gen_params);
  j["discriminator_spec"] = mlp_spec_to_json(m.disc_spec);
  j["discriminator_params"] = params_to_json(m.disc_params);
  return j;
}

GanModel gan_from_json(const Json& j) {
  GanModel m;
  try {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "supervised")
      m.mode = GanMode::Supervised;
    else if (mode == "unsupervised")
      m.mode = GanMode::Unsupervised;
    else
      throw FormatError("unknown gan mode '" + mode + "'");
    m.n_classes = j.at("n_classes").get<int64_t>();
    m.f.table = j.at("label_map").get<std::vector<int>>();
    m.out_scale = j.at("out_scale").get<double>();
    m.gen_spec = mlp_spec_from_json(j.at("generator_spec"));
    m.gen_params = params_from_json(j.at("generator_params"));
    m.disc_spec = mlp_spec_from_json(j.at("discriminator_spec"));
    m.disc_params = params_from_json(j.at("discriminator_params"));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad gan record: ") + e.what());
  }
  m.validate();
  return m;
}

Json adam_to_json(const AdamState& s) {
  Json j;
  j["t"] = s.t();
  j["lr"] = s.config().lr;
  j["beta1"] = s.config().beta1;
  j["beta2"] = s.config().beta2;
  j["eps"] = s.config().eps;
  Json m = Json::array(), v = Json::array();
  for (const auto& [name, t] : s.moments1()) {
    Json e;
    e["name"] = name;
    e["shape"] = t.shape;
    e["values"] = t.v;
    m.push_back(std::move(e));
  }
  for (const auto& [name, t] : s.moments2()) {
    Json e;
    e["name"] = name;
    e["shape"] = t.shape;
    e["values"] = t.v;
    v.push_back(std::move(e));
  }
  j["m"] = std::move(m);
  j["v"] = std::move(v);
  return j;
}

AdamState adam_from_json(const Json& j) {
  try {
    AdamConfig cfg;
    cfg.lr = j.at("lr").get<double>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.eps = j.at("eps").get<double>();
    auto read = [](const Json& arr) {
      std::vector<std::pair<std::string, Tensor>> out;
      for (const auto& e : arr)
        out.emplace_back(e.at("name").get<std::string>(),
                         Tensor(e.at("shape").get<std::vector<int64_t>>(),
                                e.at("values").get<std::vector<double>>()));
      return out;
    };
    ParamStore dummy;
    AdamState s(dummy, cfg);
    s.restore(j.at("t").get<int64_t>(), read(j.at("m")), read(j.at("v")));
    return s;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad adam record: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const std::string& kind, Json body) {
  Json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["kind"] = kind;
  for (auto& [key, value] : body.items()) doc[key] = std::move(value);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Json read_checkpoint(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError("checkpoint parse error in '" + path.string() + "': " + e.what());
  }
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != kCheckpointVersion)
    throw FormatError("unsupported or missing format_version in '" + path.string() + "'");
  if (!doc.contains("kind") || doc["kind"].get<std::string>() != kind)
    throw FormatError("checkpoint kind mismatch in '" + path.string() + "'");
  return doc;
}

}  // namespace gmgan
