#include "gmgan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "gmgan/checkpoint.hpp"
#include "gmgan/clustering.hpp"
#include "gmgan/fmt.hpp"

namespace gmgan {

namespace {

int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ParamError("key '" + key + "': expected integer, got '" + v + "'");
  }
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ParamError("key '" + key + "': expected unsigned integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ParamError("key '" + key + "': expected number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParamError("key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

std::vector<int64_t> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int64_t> out;
  for (const auto& s : split_list(v)) out.push_back(parse_int(key, s));
  return out;
}

std::vector<int> parse_int32_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(parse_int(key, s)));
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

std::string join_int_list(const std::vector<int64_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_double_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::string join_string_list(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kExperiments{"train",       "toy-convergence",
                                                     "sigma-sweep", "score",
                                                     "cluster",     "gen-toy"};
  if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
    throw ParamError("unknown experiment '" + experiment + "'");
  train.validate();
  if (repeats < 1) throw ParamError("repeats must be >= 1");
  if (jobs < 1) throw ParamError("jobs must be >= 1");
  if (epochs < 0) throw ParamError("epochs must be >= 0");
  if (!(quality_a > 0.0)) throw ParamError("quality_a must be > 0");
  for (double s : sigma_grid)
    if (!(s > 0.0)) throw ParamError("sigma_grid values must be > 0");
  if (!(sigma > 0.0)) throw ParamError("sigma must be > 0");
  if (score_samples < 1 || nll_samples < 1 || intra_samples < 1)
    throw ParamError("sample counts must be >= 1");
  if (cluster_m < 1) throw ParamError("cluster_m must be >= 1");
}

std::vector<double> ExperimentConfig::effective_sigma_grid(Modality m) const {
  if (!sigma_grid.empty()) return sigma_grid;
  if (m == Modality::Points) return {0.25, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> fine;
  for (int i = 5; i <= 20; ++i) fine.push_back(static_cast<double>(i) / 10.0);
  return fine;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "dataset") cfg.dataset = value;
  else if (key == "toy_n") cfg.toy_n = parse_int(key, value);
  else if (key == "toy_variance") cfg.toy_variance = parse_double(key, value);
  else if (key == "per_class") cfg.per_class = parse_int(key, value);
  else if (key == "K") cfg.train.K = parse_int(key, value);
  else if (key == "d") cfg.train.d = parse_int(key, value);
  else if (key == "c") cfg.train.c = parse_double(key, value);
  else if (key == "sigma_init") cfg.train.sigma_init = parse_double(key, value);
  else if (key == "dynamic") cfg.train.dynamic_prior = parse_bool(key, value);
  else if (key == "full_factor") cfg.train.full_factor = parse_bool(key, value);
  else if (key == "supervised") cfg.train.supervised = parse_bool(key, value);
  else if (key == "iters") cfg.train.iters = parse_int(key, value);
  else if (key == "epochs") cfg.epochs = parse_int(key, value);
  else if (key == "b_d") cfg.train.b_d = parse_int(key, value);
  else if (key == "b_g") cfg.train.b_g = parse_int(key, value);
  else if (key == "gamma") cfg.train.adam.lr = parse_double(key, value);
  else if (key == "beta1") cfg.train.adam.beta1 = parse_double(key, value);
  else if (key == "beta2") cfg.train.adam.beta2 = parse_double(key, value);
  else if (key == "adam_eps") cfg.train.adam.eps = parse_double(key, value);
  else if (key == "g_hidden") cfg.train.g_hidden = parse_int_list(key, value);
  else if (key == "d_hidden") cfg.train.d_hidden = parse_int_list(key, value);
  else if (key == "weight_std") cfg.train.weight_std = parse_double(key, value);
  else if (key == "leaky_slope") cfg.train.leaky_slope = parse_double(key, value);
  else if (key == "out_scale") cfg.train.out_scale = parse_double(key, value);
  else if (key == "epoch_size") cfg.train.epoch_size = parse_int(key, value);
  else if (key == "snapshot_every") cfg.train.snapshot_every = parse_int(key, value);
  else if (key == "label_table") cfg.train.label_table = parse_int32_list(key, value);
  else if (key == "models") cfg.models = split_list(value);
  else if (key == "quality_a") cfg.quality_a = parse_double(key, value);
  else if (key == "feature_layer") cfg.feature_layer = static_cast<int>(parse_int(key, value));
  else if (key == "msssim_window") cfg.msssim.window = static_cast<int>(parse_int(key, value));
  else if (key == "msssim_sigma") cfg.msssim.window_sigma = parse_double(key, value);
  else if (key == "msssim_k1") cfg.msssim.k1 = parse_double(key, value);
  else if (key == "msssim_k2") cfg.msssim.k2 = parse_double(key, value);
  else if (key == "msssim_range") cfg.msssim.dynamic_range = parse_double(key, value);
  else if (key == "msssim_weights") cfg.msssim.scale_weights = parse_double_list(key, value);
  else if (key == "clf_hidden") cfg.clf.hidden = parse_int_list(key, value);
  else if (key == "clf_epochs") cfg.clf.epochs = parse_int(key, value);
  else if (key == "clf_batch") cfg.clf.batch = parse_int(key, value);
  else if (key == "clf_lr") cfg.clf.adam.lr = parse_double(key, value);
  else if (key == "score_samples") cfg.score_samples = parse_int(key, value);
  else if (key == "intra_samples") cfg.intra_samples = parse_int(key, value);
  else if (key == "nll_samples") cfg.nll_samples = parse_int(key, value);
  else if (key == "sigma") cfg.sigma = parse_double(key, value);
  else if (key == "sigma_grid") cfg.sigma_grid = parse_double_list(key, value);
  else if (key == "cluster_m") cfg.cluster_m = parse_int(key, value);
  else if (key == "repeats") cfg.repeats = parse_int(key, value);
  else if (key == "jobs") cfg.jobs = parse_int(key, value);
  else if (key == "seed") cfg.seed = parse_uint(key, value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else throw ParamError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line " + std::to_string(lineno) + " is not key=value: '" + line +
                        "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["experiment"] = cfg.experiment;
  kv["dataset"] = cfg.dataset;
  kv["toy_n"] = std::to_string(cfg.toy_n);
  kv["toy_variance"] = format_double(cfg.toy_variance);
  kv["per_class"] = std::to_string(cfg.per_class);
  kv["K"] = std::to_string(cfg.train.K);
  kv["d"] = std::to_string(cfg.train.d);
  kv["c"] = format_double(cfg.train.c);
  kv["sigma_init"] = format_double(cfg.train.sigma_init);
  kv["dynamic"] = cfg.train.dynamic_prior ? "true" : "false";
  kv["full_factor"] = cfg.train.full_factor ? "true" : "false";
  kv["supervised"] = cfg.train.supervised ? "true" : "false";
  kv["iters"] = std::to_string(cfg.train.iters);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["b_d"] = std::to_string(cfg.train.b_d);
  kv["b_g"] = std::to_string(cfg.train.b_g);
  kv["gamma"] = format_double(cfg.train.adam.lr);
  kv["beta1"] = format_double(cfg.train.adam.beta1);
  kv["beta2"] = format_double(cfg.train.adam.beta2);
  kv["adam_eps"] = format_double(cfg.train.adam.eps);
  kv["g_hidden"] = join_int_list(cfg.train.g_hidden);
  kv["d_hidden"] = join_int_list(cfg.train.d_hidden);
  kv["weight_std"] = format_double(cfg.train.weight_std);
  kv["leaky_slope"] = format_double(cfg.train.leaky_slope);
  kv["out_scale"] = format_double(cfg.train.out_scale);
  kv["epoch_size"] = std::to_string(cfg.train.epoch_size);
  kv["snapshot_every"] = std::to_string(cfg.train.snapshot_every);
  if (cfg.train.label_table) {
    std::string t;
    for (size_t i = 0; i < cfg.train.label_table->size(); ++i) {
      if (i) t += ',';
      t += std::to_string((*cfg.train.label_table)[i]);
    }
    kv["label_table"] = t;
  }
  kv["models"] = join_string_list(cfg.models);
  kv["quality_a"] = format_double(cfg.quality_a);
  kv["feature_layer"] = std::to_string(cfg.feature_layer);
  kv["msssim_window"] = std::to_string(cfg.msssim.window);
  kv["msssim_sigma"] = format_double(cfg.msssim.window_sigma);
  kv["msssim_k1"] = format_double(cfg.msssim.k1);
  kv["msssim_k2"] = format_double(cfg.msssim.k2);
  kv["msssim_range"] = format_double(cfg.msssim.dynamic_range);
  kv["msssim_weights"] = join_double_list(cfg.msssim.scale_weights);
  kv["clf_hidden"] = join_int_list(cfg.clf.hidden);
  kv["clf_epochs"] = std::to_string(cfg.clf.epochs);
  kv["clf_batch"] = std::to_string(cfg.clf.batch);
  kv["clf_lr"] = format_double(cfg.clf.adam.lr);
  kv["score_samples"] = std::to_string(cfg.score_samples);
  kv["intra_samples"] = std::to_string(cfg.intra_samples);
  kv["nll_samples"] = std::to_string(cfg.nll_samples);
  kv["sigma"] = format_double(cfg.sigma);
  kv["sigma_grid"] = join_double_list(cfg.sigma_grid);
  kv["cluster_m"] = std::to_string(cfg.cluster_m);
  kv["repeats"] = std::to_string(cfg.repeats);
  kv["seed"] = std::to_string(cfg.seed);
  kv["checkpoint"] = cfg.checkpoint;
  // out_dir and jobs deliberately excluded: neither changes results, and
  // the hash must agree for reruns that only differ in where they write.

  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "toy") {
    Rng rng(derive_seed(cfg.seed, "dataset"));
    return gen_toy(cfg.toy_n, cfg.toy_variance, rng);
  }
  if (cfg.dataset == "synth-images") {
    const int64_t per_class = cfg.per_class > 0 ? cfg.per_class : 1000;
    return make_synth_images(per_class, derive_seed(cfg.seed, "dataset"));
  }
  if (cfg.dataset.rfind("idx:", 0) == 0) {
    const std::string paths = cfg.dataset.substr(4);
    const auto comma = paths.find(',');
    Dataset ds = comma == std::string::npos
                     ? load_idx(paths)
                     : load_idx(paths.substr(0, comma),
                                std::filesystem::path(paths.substr(comma + 1)));
    if (cfg.per_class > 0) return subset(ds, cfg.per_class, derive_seed(cfg.seed, "subset"));
    return ds;
  }
  throw ParamError("unknown dataset spec '" + cfg.dataset + "'");
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimError("spearman inputs differ in length");
  const size_t n = x.size();
  if (n < 2) throw ParamError("spearman needs at least two points");
  auto ranks = [n](std::span<const double> v) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n, 0.0);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ParamError("spearman undefined for constant ranks");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

void run_jobs(int64_t jobs, std::vector<std::function<void()>> tasks) {
  if (jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const int64_t n_threads = std::min<int64_t>(jobs, static_cast<int64_t>(tasks.size()));
  std::vector<std::thread> pool;
  for (int64_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (size_t i; (i = next.fetch_add(1)) < tasks.size();) {
        try {
          tasks[i]();
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::ofstream open_csv(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# seed=" << cfg.seed << " config_hash=" << config_hash(cfg)
      << " format_version=" << kCheckpointVersion << "\n";
  return out;
}

int64_t dataset_epoch_size(const ExperimentConfig& cfg, const Dataset& ds) {
  if (cfg.train.epoch_size > 0) return cfg.train.epoch_size;
  return (ds.size() + cfg.train.b_d - 1) / cfg.train.b_d;
}

int64_t total_iterations(const ExperimentConfig& cfg, const Dataset& ds) {
  if (cfg.train.iters > 0) return cfg.train.iters;
  return cfg.epochs * dataset_epoch_size(cfg, ds);
}

// Toy-mixture NLL of freshly generated samples; the evaluation rng is
// derived per epoch so it never perturbs the training stream.
EpochHook make_toy_nll_hook(const ExperimentConfig& cfg, uint64_t run_seed,
                            const std::string& tag) {
  const auto means = toy_means();
  const auto covs = toy_covariances(cfg.toy_variance);
  const auto weights = toy_weights();
  const int64_t n_samples = cfg.nll_samples;
  return [means, covs, weights, n_samples, run_seed, tag](const GanModel& model,
                                                          const MixturePrior& prior,
                                                          int64_t epoch) {
    Rng rng(derive_seed(derive_seed(run_seed, "eval-" + tag), static_cast<uint64_t>(epoch)));
    std::vector<int> ks(static_cast<size_t>(n_samples));
    for (auto& k : ks) k = prior.sample_component(rng);
    const Tensor z = prior.sample_latent_batch(ks, SigmaScale{1.0}, rng);
    const Tensor x = generate(model, z);
    return nll_under_mixture(x, means, covs, weights);
  };
}

FeatureClassifier train_scoring_classifier(const ExperimentConfig& cfg, const Dataset& ds) {
  if (!ds.labeled())
    throw ParamError("scoring requires a labeled dataset to train the classifier");
  ClassifierConfig clf_cfg = cfg.clf;
  clf_cfg.seed = derive_seed(cfg.seed, "classifier");
  clf_cfg.feature_layer = cfg.feature_layer;
  return FeatureClassifier::train(ds, clf_cfg);
}

ScoreReport score_generated(const ExperimentConfig& cfg, const Dataset& ds,
                            const FeatureClassifier& clf, const Tensor& train_feats,
                            const GanModel& model, const MixturePrior& prior, double sigma,
                            Rng& rng) {
  std::vector<int> ks(static_cast<size_t>(cfg.score_samples));
  for (auto& k : ks) k = prior.sample_component(rng);
  const Tensor z = prior.sample_latent_batch(ks, SigmaScale{sigma}, rng);
  const Tensor x = generate(model, z);

  ScoreReport r;
  r.sigma_scale = sigma;
  r.n_samples = cfg.score_samples;
  r.q = quality_set(x, clf, train_feats, cfg.quality_a, cfg.feature_layer);
  r.inter = d_inter(x, clf);
  r.classifier_is = classifier_is(x, clf);
  if (ds.modality() == Modality::Images) {
    const int64_t m = std::min<int64_t>(cfg.intra_samples, x.rows());
    Tensor head = Tensor::zeros({m, x.cols()});
    std::copy(x.v.begin(), x.v.begin() + m * x.cols(), head.v.begin());
    r.intra = d_intra(head, ds.height(), ds.width(), ds.channels(), cfg.msssim);
    r.d = diversity(*r.intra, *r.inter);
    r.s = combined(*r.q, *r.d);
  } else if (cfg.dataset == "toy") {
    r.nll = nll_under_mixture(x, toy_means(), toy_covariances(cfg.toy_variance), toy_weights());
  }
  return r;
}

struct TrainedModel {
  GanModel model;
  MixturePrior prior;
};

TrainedModel train_variant(const ExperimentConfig& cfg, const Dataset& ds,
                           const std::string& variant, uint64_t run_seed, int64_t iters,
                           const EpochHook& hook, TrainHistory* history_out = nullptr) {
  TrainConfig tc = variant_train_config(cfg, variant, ds.labeled() ? ds.n_classes() : 1);
  tc.seed = run_seed;
  tc.iters = iters;
  TrainSession session = TrainSession::create(tc, ds);
  session.run(ds, iters, hook);
  if (history_out) *history_out = session.history();
  return TrainedModel{std::move(session.model()), std::move(session.prior())};
}

}  // namespace

TrainConfig variant_train_config(const ExperimentConfig& cfg, const std::string& model,
                                 int64_t n_classes) {
  TrainConfig tc = cfg.train;
  if (model == "gmgan") {
    tc.supervised = false;
  } else if (model == "gmgan-sup") {
    tc.supervised = true;
  } else if (model == "gan") {
    // Standard-normal prior baseline.
    tc.supervised = false;
    tc.K = 1;
    tc.c = 0.0;
    tc.sigma_init = 1.0;
    tc.dynamic_prior = false;
  } else if (model == "gan-sup") {
    // N-output discriminator over a standard-normal prior: N coincident
    // N(0, I) components keep the component->class losses defined while the
    // marginal latent distribution stays exactly standard normal.
    tc.supervised = true;
    tc.K = std::max<int64_t>(n_classes, 1);
    tc.c = 0.0;
    tc.sigma_init = 1.0;
    tc.dynamic_prior = false;
  } else {
    throw ParamError("unknown model variant '" + model + "'");
  }
  return tc;
}

std::vector<std::filesystem::path> run_gen_toy(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  Rng rng(derive_seed(cfg.seed, "dataset"));
  const Dataset ds = gen_toy(cfg.toy_n, cfg.toy_variance, rng);
  const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / "toy.csv";
  std::ofstream out = open_csv(path, cfg);
  out << "x0,x1,label\n";
  for (int64_t i = 0; i < ds.size(); ++i)
    out << format_double(ds.samples().at(i, 0)) << ',' << format_double(ds.samples().at(i, 1))
        << ',' << ds.label(i) << "\n";
  return {path};
}

std::vector<std::filesystem::path> run_train(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Dataset ds = build_dataset(cfg);
  const int64_t iters = total_iterations(cfg, ds);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.iters = iters;
  TrainSession session = TrainSession::create(tc, ds);
  EpochHook hook;
  if (cfg.dataset == "toy") hook = make_toy_nll_hook(cfg, cfg.seed, "train");
  session.run(ds, iters, hook);

  const std::filesystem::path dir(cfg.out_dir);
  const auto model_path = dir / "model.json";
  const auto session_path = dir / "session.json";
  const auto history_path = dir / "history.csv";
  save_model_checkpoint(model_path, session.model(), session.prior());
  session.save(session_path);
  write_history_csv(history_path, session.history(), cfg.seed, config_hash(cfg));

  std::vector<std::filesystem::path> written{model_path, session_path, history_path};
  if (hook) {
    const auto metrics_path = dir / "epoch_metrics.csv";
    std::ofstream out = open_csv(metrics_path, cfg);
    out << "epoch,nll\n";
    for (size_t e = 0; e < session.history().epoch_metric.size(); ++e)
      out << e << ',' << format_double(session.history().epoch_metric[e]) << "\n";
    written.push_back(metrics_path);
  }
  return written;
}

std::vector<std::filesystem::path> run_toy_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.dataset != "toy") throw ParamError("toy-convergence requires dataset=toy");
  std::filesystem::create_directories(cfg.out_dir);
  const Dataset ds = build_dataset(cfg);
  const int64_t iters = total_iterations(cfg, ds);

  struct Cell {
    std::vector<double> nll;
  };
  std::vector<std::vector<Cell>> results(cfg.models.size(),
                                         std::vector<Cell>(static_cast<size_t>(cfg.repeats)));
  std::vector<std::function<void()>> tasks;
  for (size_t mi = 0; mi < cfg.models.size(); ++mi) {
    for (int64_t r = 0; r < cfg.repeats; ++r) {
      tasks.push_back([&, mi, r]() {
        const uint64_t run_seed = derive_seed(cfg.seed, "repeat-" + std::to_string(r));
        const EpochHook hook = make_toy_nll_hook(cfg, run_seed, cfg.models[mi]);
        TrainHistory history;
        train_variant(cfg, ds, cfg.models[mi], run_seed, iters, hook, &history);
        results[mi][static_cast<size_t>(r)].nll = history.epoch_metric;
      });
    }
  }
  run_jobs(cfg.jobs, std::move(tasks));

  const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / "toy_convergence.csv";
  std::ofstream out = open_csv(path, cfg);
  out << "model,repeat,epoch,nll\n";
  for (size_t mi = 0; mi < cfg.models.size(); ++mi)
    for (int64_t r = 0; r < cfg.repeats; ++r) {
      const auto& nll = results[mi][static_cast<size_t>(r)].nll;
      for (size_t e = 0; e < nll.size(); ++e)
        out << cfg.models[mi] << ',' << r << ',' << e << ',' << format_double(nll[e]) << "\n";
    }
  return {path};
}

std::vector<std::filesystem::path> run_sigma_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Dataset ds = build_dataset(cfg);
  const FeatureClassifier clf = train_scoring_classifier(cfg, ds);
  const Tensor train_feats = clf.features(ds.samples(), cfg.feature_layer);
  const auto grid = cfg.effective_sigma_grid(ds.modality());
  const int64_t iters = total_iterations(cfg, ds);

  std::vector<std::vector<ScoreReport>> reports(
      static_cast<size_t>(cfg.repeats), std::vector<ScoreReport>(grid.size()));
  std::vector<std::function<void()>> tasks;
  for (int64_t r = 0; r < cfg.repeats; ++r) {
    tasks.push_back([&, r]() {
      const uint64_t run_seed = derive_seed(cfg.seed, "repeat-" + std::to_string(r));
      TrainedModel tm = cfg.checkpoint.empty()
                            ? train_variant(cfg, ds, "gmgan", run_seed, iters, {})
                            : [&]() {
                                auto [m, p] = load_model_checkpoint(cfg.checkpoint);
                                return TrainedModel{std::move(m), std::move(p)};
                              }();
      for (size_t si = 0; si < grid.size(); ++si) {
        Rng rng(derive_seed(run_seed, "score-" + format_double(grid[si])));
        reports[static_cast<size_t>(r)][si] =
            score_generated(cfg, ds, clf, train_feats, tm.model, tm.prior, grid[si], rng);
      }
    });
  }
  run_jobs(cfg.jobs, std::move(tasks));

  const std::filesystem::path dir(cfg.out_dir);
  const auto raw_path = dir / "sigma_sweep_raw.csv";
  {
    std::ofstream out = open_csv(raw_path, cfg);
    out << "repeat," << ScoreReport::csv_header() << "\n";
    for (int64_t r = 0; r < cfg.repeats; ++r)
      for (const auto& rep : reports[static_cast<size_t>(r)])
        out << r << ',' << rep.csv_row() << "\n";
  }

  const auto agg_path = dir / "sigma_sweep_agg.csv";
  {
    std::ofstream out = open_csv(agg_path, cfg);
    out << "sigma,q_mean,q_se,d_intra_mean,d_intra_se,d_inter_mean,d_inter_se,d_mean,d_se,"
           "s_mean,s_se,is_mean,is_se,nll_mean,nll_se,repeats\n";
    auto agg = [&](auto getter, size_t si, double& mean, double& se) {
      std::vector<double> vals;
      for (int64_t r = 0; r < cfg.repeats; ++r) {
        const auto& v = getter(reports[static_cast<size_t>(r)][si]);
        if (!v) {
          mean = se = std::nan("");
          return;
        }
        vals.push_back(*v);
      }
      double m = 0.0;
      for (double v : vals) m += v;
      m /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - m) * (v - m);
      se = vals.size() > 1
               ? std::sqrt(var / static_cast<double>(vals.size() - 1)) /
                     std::sqrt(static_cast<double>(vals.size()))
               : 0.0;
      mean = m;
    };
    for (size_t si = 0; si < grid.size(); ++si) {
      out << format_double(grid[si]);
      const auto fields = {
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.q; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.intra; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.inter; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.d; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.s; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.classifier_is; },
          +[](const ScoreReport& r) -> const std::optional<double>& { return r.nll; },
      };
      for (const auto& getter : fields) {
        double mean = 0.0, se = 0.0;
        agg(getter, si, mean, se);
        out << ',' << format_double(mean) << ',' << format_double(se);
      }
      out << ',' << cfg.repeats << "\n";
    }
  }
  return {raw_path, agg_path};
}

std::vector<std::filesystem::path> run_score(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.checkpoint.empty()) throw ParamError("score requires checkpoint=<model.json>");
  std::filesystem::create_directories(cfg.out_dir);
  const Dataset ds = build_dataset(cfg);
  const FeatureClassifier clf = train_scoring_classifier(cfg, ds);
  const Tensor train_feats = clf.features(ds.samples(), cfg.feature_layer);
  auto [model, prior] = load_model_checkpoint(cfg.checkpoint);
  Rng rng(derive_seed(cfg.seed, "score-" + format_double(cfg.sigma)));
  const ScoreReport report =
      score_generated(cfg, ds, clf, train_feats, model, prior, cfg.sigma, rng);

  const std::filesystem::path dir(cfg.out_dir);
  const auto csv_path = dir / "score.csv";
  {
    std::ofstream out = open_csv(csv_path, cfg);
    out << ScoreReport::csv_header() << "\n" << report.csv_row() << "\n";
  }
  const auto json_path = dir / "score_report.json";
  {
    Json body;
    body["sigma"] = report.sigma_scale;
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v)
        body[key] = *v;
      else
        body[key] = nullptr;
    };
    put("q", report.q);
    put("d_intra", report.intra);
    put("d_inter", report.inter);
    put("d", report.d);
    put("s", report.s);
    put("classifier_is", report.classifier_is);
    put("nll", report.nll);
    body["n_samples"] = report.n_samples;
    body["seed"] = cfg.seed;
    body["config_hash"] = config_hash(cfg);
    body["classifier_holdout_accuracy"] = clf.holdout_accuracy();
    write_checkpoint(json_path, "gmgan-score-report", std::move(body));
  }
  return {csv_path, json_path};
}

std::vector<std::filesystem::path> run_cluster(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Dataset ds = build_dataset(cfg);
  const int64_t iters = total_iterations(cfg, ds);

  TrainConfig tc = cfg.train;
  tc.iters = iters;
  ClassifierConfig clf_cfg = cfg.clf;

  std::vector<ClusterResult> results(static_cast<size_t>(cfg.repeats));
  std::vector<std::function<void()>> tasks;
  for (int64_t r = 0; r < cfg.repeats; ++r) {
    tasks.push_back([&, r]() {
      const uint64_t run_seed = derive_seed(cfg.seed, "repeat-" + std::to_string(r));
      results[static_cast<size_t>(r)] =
          cluster(ds, cfg.train.K, cfg.cluster_m, tc, clf_cfg, run_seed);
    });
  }
  run_jobs(cfg.jobs, std::move(tasks));

  const std::filesystem::path dir(cfg.out_dir);
  std::vector<std::filesystem::path> written;
  for (int64_t r = 0; r < cfg.repeats; ++r) {
    const auto& res = results[static_cast<size_t>(r)];
    const auto path = dir / ("cluster_assignments_" + std::to_string(r) + ".csv");
    std::ofstream out = open_csv(path, cfg);
    out << "sample_index,hard";
    for (int64_t k = 0; k < res.soft.cols(); ++k) out << ",soft_" << k;
    out << "\n";
    for (int64_t i = 0; i < res.soft.rows(); ++i) {
      out << i << ',' << res.hard[static_cast<size_t>(i)];
      for (int64_t k = 0; k < res.soft.cols(); ++k) out << ',' << format_double(res.soft.at(i, k));
      out << "\n";
    }
    written.push_back(path);
  }

  const auto metrics_path = dir / "cluster_metrics.csv";
  {
    std::ofstream out = open_csv(metrics_path, cfg);
    out << "repeat,acc,nmi\n";
    double acc_sum = 0.0, nmi_sum = 0.0;
    int64_t counted = 0;
    for (int64_t r = 0; r < cfg.repeats; ++r) {
      const auto& res = results[static_cast<size_t>(r)];
      out << r << ',' << (res.acc ? format_double(*res.acc) : "nan") << ','
          << (res.nmi ? format_double(*res.nmi) : "nan") << "\n";
      if (res.acc && res.nmi) {
        acc_sum += *res.acc;
        nmi_sum += *res.nmi;
        ++counted;
      }
    }
    if (counted > 0)
      out << "mean," << format_double(acc_sum / static_cast<double>(counted)) << ','
          << format_double(nmi_sum / static_cast<double>(counted)) << "\n";
  }
  written.push_back(metrics_path);
  return written;
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "train") return run_train(cfg);
  if (cfg.experiment == "toy-convergence") return run_toy_convergence(cfg);
  if (cfg.experiment == "sigma-sweep") return run_sigma_sweep(cfg);
  if (cfg.experiment == "score") return run_score(cfg);
  if (cfg.experiment == "cluster") return run_cluster(cfg);
  if (cfg.experiment == "gen-toy") return run_gen_toy(cfg);
  throw ParamError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace gmgan
