#include "gmgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "gmgan/checkpoint.hpp"
#include "gmgan/fmt.hpp"

namespace gmgan {

void TrainConfig::validate() const {
  if (K < 1 || d < 1) throw ParamError("K and d must be >= 1");
  if (c < 0.0) throw ParamError("c must be >= 0");
  if (!(sigma_init > 0.0)) throw ParamError("sigma_init must be > 0");
  if (iters < 0) throw ParamError("iters must be >= 0");
  if (b_d < 1 || b_g < 1) throw ParamError("batch sizes must be >= 1");
  if (weight_std < 0.0) throw ParamError("weight_std must be >= 0");
}

namespace {

Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["K"] = c.K;
  j["d"] = c.d;
  j["c"] = c.c;
  j["sigma_init"] = c.sigma_init;
  j["dynamic_prior"] = c.dynamic_prior;
  j["full_factor"] = c.full_factor;
  j["iters"] = c.iters;
  j["b_d"] = c.b_d;
  j["b_g"] = c.b_g;
  j["lr"] = c.adam.lr;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["adam_eps"] = c.adam.eps;
  j["supervised"] = c.supervised;
  if (c.label_table) j["label_table"] = *c.label_table;
  j["g_hidden"] = c.g_hidden;
  j["d_hidden"] = c.d_hidden;
  j["weight_std"] = c.weight_std;
  j["leaky_slope"] = c.leaky_slope;
  j["out_scale"] = c.out_scale;
  j["seed"] = c.seed;
  j["epoch_size"] = c.epoch_size;
  j["snapshot_every"] = c.snapshot_every;
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  try {
    c.K = j.at("K").get<int64_t>();
    c.d = j.at("d").get<int64_t>();
    c.c = j.at("c").get<double>();
    c.sigma_init = j.at("sigma_init").get<double>();
    c.dynamic_prior = j.at("dynamic_prior").get<bool>();
    c.full_factor = j.at("full_factor").get<bool>();
    c.iters = j.at("iters").get<int64_t>();
    c.b_d = j.at("b_d").get<int64_t>();
    c.b_g = j.at("b_g").get<int64_t>();
    c.adam.lr = j.at("lr").get<double>();
    c.adam.beta1 = j.at("beta1").get<double>();
    c.adam.beta2 = j.at("beta2").get<double>();
    c.adam.eps = j.at("adam_eps").get<double>();
    c.supervised = j.at("supervised").get<bool>();
    if (j.contains("label_table")) c.label_table = j.at("label_table").get<std::vector<int>>();
    c.g_hidden = j.at("g_hidden").get<std::vector<int64_t>>();
    c.d_hidden = j.at("d_hidden").get<std::vector<int64_t>>();
    c.weight_std = j.at("weight_std").get<double>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.out_scale = j.at("out_scale").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.epoch_size = j.at("epoch_size").get<int64_t>();
    c.snapshot_every = j.at("snapshot_every").get<int64_t>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad train config record: ") + e.what());
  }
  return c;
}

MlpSpec build_spec(int64_t in, const std::vector<int64_t>& hidden, int64_t out, Act out_act,
                   double slope) {
  std::vector<int64_t> widths;
  widths.push_back(in);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return MlpSpec::make(std::move(widths), out_act, slope);
}

}  // namespace

TrainSession::TrainSession(const TrainConfig& cfg, GanModel model, MixturePrior prior)
    : cfg_(cfg),
      model_(std::move(model)),
      prior_(std::move(prior)),
      adam_d_(model_.disc_params, cfg.adam),
      adam_g_(model_.gen_params, cfg.adam),
      adam_p_(prior_.params(), cfg.adam),
      rng_(derive_seed(cfg.seed, "train")) {
  cfg_.validate();
  model_.validate();
}

TrainSession TrainSession::create(const TrainConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (cfg.supervised && !data.labeled())
    throw ParamError("supervised training requires a labeled dataset");
  const int64_t N = cfg.supervised ? data.n_classes() : 1;

  Rng prior_rng(derive_seed(cfg.seed, "prior"));
  MixturePrior prior =
      MixturePrior::init_static(cfg.K, cfg.d, cfg.c, cfg.sigma_init, prior_rng, cfg.full_factor);
  prior.set_dynamic(cfg.dynamic_prior);

  Rng weight_rng(derive_seed(cfg.seed, "weights"));
  MlpSpec gen =
      build_spec(cfg.d, cfg.g_hidden, data.dim(), Act::Tanh, cfg.leaky_slope);
  MlpSpec disc =
      build_spec(data.dim(), cfg.d_hidden, cfg.supervised ? N : 1, Act::Sigmoid, cfg.leaky_slope);
  GanModel model = make_gan(gen, disc, cfg.supervised ? GanMode::Supervised : GanMode::Unsupervised,
                            N, LabelMap::make(cfg.K, N, cfg.label_table), weight_rng,
                            cfg.weight_std, cfg.out_scale);
  return TrainSession(cfg, std::move(model), std::move(prior));
}

int64_t TrainSession::epoch_size(const Dataset& data) const {
  if (cfg_.epoch_size > 0) return cfg_.epoch_size;
  return (data.size() + cfg_.b_d - 1) / cfg_.b_d;
}

void TrainSession::one_iteration(const Dataset& data) {
  try {
    iteration_body(data);
  } catch (const NumericError& e) {
    throw NumericError("iteration " + std::to_string(iter_) + ": " + e.what());
  }
}

void TrainSession::iteration_body(const Dataset& data) {
  const int64_t n = data.size();
  const int64_t dim = data.dim();

  // Discriminator step: b_d real samples and b_d detached fakes (Alg. 1
  // draws one of each per inner iteration).
  Tensor real = Tensor::zeros({cfg_.b_d, dim});
  std::vector<int> real_labels(static_cast<size_t>(cfg_.b_d), 0);
  for (int64_t j = 0; j < cfg_.b_d; ++j) {
    const int64_t idx = rng_.uniform_index(n);
    data.fetch(idx, std::span<double>(real.v.data() + j * dim, static_cast<size_t>(dim)));
    if (cfg_.supervised) real_labels[static_cast<size_t>(j)] = data.label(idx);
  }
  std::vector<int> ks(static_cast<size_t>(cfg_.b_d));
  for (auto& k : ks) k = prior_.sample_component(rng_);
  const MixturePrior& cprior = prior_;
  Tensor z = cprior.sample_latent_batch(ks, SigmaScale{1.0}, rng_);
  Tensor fake = generate(model_, z);

  Tape td;
  Var d_real = discriminate_on(td, model_, td.input(std::move(real)));
  Var d_fake = discriminate_on(td, model_, td.input(std::move(fake)));
  Var ld = cfg_.supervised ? loss_d_sup_on(td, d_real, real_labels, d_fake)
                           : loss_d_unsup_on(td, d_real, d_fake);
  ld = td.scale(ld, 0.5);  // the 1/(2 b_d) aggregation's 1/2
  const double loss_d_value = td.value(ld).v[0];
  if (!std::isfinite(loss_d_value)) throw NumericError("discriminator loss non-finite");
  td.backward(ld);
  adam_step(model_.disc_params, adam_d_);

  // Generator step: gradients flow through the sampled latents (and the
  // prior parameters when dynamic); theta_D is read but not updated.
  std::vector<int> ks_g(static_cast<size_t>(cfg_.b_g));
  for (auto& k : ks_g) k = prior_.sample_component(rng_);
  Tape tg;
  Var zg = prior_.sample_latent_batch(tg, ks_g, SigmaScale{1.0}, rng_);
  Var fake_g = generate_on(tg, model_, zg);
  Var d_on_fake = discriminate_on(tg, model_, fake_g);
  Var lg = cfg_.supervised ? loss_g_sup_on(tg, d_on_fake, ks_g, model_.f)
                           : loss_g_unsup_on(tg, d_on_fake);
  const double loss_g_value = tg.value(lg).v[0];
  if (!std::isfinite(loss_g_value)) throw NumericError("generator loss non-finite");
  tg.backward(lg);
  adam_step(model_.gen_params, adam_g_);
  if (prior_.dynamic())
    adam_step(prior_.params(), adam_p_);
  else
    prior_.params().zero_grads();
  model_.disc_params.zero_grads();

  history_.loss_d.push_back(loss_d_value);
  history_.loss_g.push_back(loss_g_value);
  ++iter_;
}

void TrainSession::run(const Dataset& data, int64_t iters, const EpochHook& hook) {
  if (iters < 0) throw ParamError("iters must be >= 0");
  if (cfg_.supervised && !data.labeled())
    throw ParamError("supervised training requires a labeled dataset");
  const int64_t es = epoch_size(data);
  if (hook) history_.epoch_metric.push_back(hook(model_, prior_, iter_ / es));
  auto epoch_start = std::chrono::steady_clock::now();
  for (int64_t i = 0; i < iters; ++i) {
    one_iteration(data);
    if (iter_ % es == 0) {
      const auto now = std::chrono::steady_clock::now();
      history_.epoch_seconds.push_back(std::chrono::duration<double>(now - epoch_start).count());
      epoch_start = now;
      if (hook) history_.epoch_metric.push_back(hook(model_, prior_, iter_ / es));
    }
  }
}

void TrainSession::save(const std::filesystem::path& path) const {
  Json body;
  body["config"] = train_config_to_json(cfg_);
  body["iterations"] = iter_;
  body["model"] = gan_to_json(model_);
  body["prior"] = prior_to_json(prior_);
  body["adam_d"] = adam_to_json(adam_d_);
  body["adam_g"] = adam_to_json(adam_g_);
  body["adam_p"] = adam_to_json(adam_p_);
  body["rng"] = rng_.serialize();
  write_checkpoint(path, "gmgan-session", std::move(body));
}

TrainSession TrainSession::resume(const std::filesystem::path& checkpoint) {
  Json doc = read_checkpoint(checkpoint, "gmgan-session");
  TrainConfig cfg = train_config_from_json(doc.at("config"));
  TrainSession s(cfg, gan_from_json(doc.at("model")), prior_from_json(doc.at("prior")));
  s.adam_d_ = adam_from_json(doc.at("adam_d"));
  s.adam_g_ = adam_from_json(doc.at("adam_g"));
  s.adam_p_ = adam_from_json(doc.at("adam_p"));
  s.rng_.restore(doc.at("rng").get<std::string>());
  s.iter_ = doc.at("iterations").get<int64_t>();
  return s;
}

TrainHistory train(const TrainConfig& cfg, const Dataset& data, GanModel& model,
                   MixturePrior& prior, Rng& rng, const EpochHook& hook) {
  TrainSession session(cfg, std::move(model), std::move(prior));
  session.rng() = rng;
  session.run(data, cfg.iters, hook);
  rng = session.rng();
  model = std::move(session.model());
  prior = std::move(session.prior());
  return session.history();
}

void save_model_checkpoint(const std::filesystem::path& path, const GanModel& model,
                           const MixturePrior& prior) {
  Json body;
  body["model"] = gan_to_json(model);
  body["prior"] = prior_to_json(prior);
  write_checkpoint(path, "gmgan-model", std::move(body));
}

std::pair<GanModel, MixturePrior> load_model_checkpoint(const std::filesystem::path& path) {
  Json doc = read_checkpoint(path, "gmgan-model");
  return {gan_from_json(doc.at("model")), prior_from_json(doc.at("prior"))};
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& h, uint64_t seed,
                       const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# seed=" << seed << " config_hash=" << config_hash
      << " format_version=" << kCheckpointVersion << "\n";
  out << "iter,loss_d,loss_g\n";
  for (size_t i = 0; i < h.loss_d.size(); ++i)
    out << i << ',' << format_double(h.loss_d[i]) << ',' << format_double(h.loss_g[i]) << "\n";
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace gmgan
