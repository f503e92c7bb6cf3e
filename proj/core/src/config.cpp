#include "rbctl/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/parallel.hpp"

namespace rbctl {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* what) {
  throw std::invalid_argument("config key '" + key + "': cannot read '" + text + "' as " + what);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE) bad_value(key, text, "a number");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) bad_value(key, text, "an integer");
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || *end != '\0' || errno == ERANGE) {
    bad_value(key, text, "an unsigned integer");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    bad_value(key, text, "a 32-bit integer");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad_value(key, text, "true/false");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split(text, ',')) out.push_back(to_int(key, s));
  return out;
}

// Points are separated by ';', coordinates by ','.
std::string join_points(const std::vector<Parameter>& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ';';
    out += join_doubles(std::vector<double>(points[i].data(), points[i].data() + points[i].size()));
  }
  return out;
}

std::vector<Parameter> parse_points(const std::string& key, const std::string& text) {
  std::vector<Parameter> out;
  for (const auto& item : split(text, ';')) {
    const std::vector<double> xs = parse_doubles(key, item);
    out.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

#define RBCTL_DOUBLE(sec, name, member)                                            \
  Field{sec, name, [](const ExperimentConfig& c) { return format_double(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }}
#define RBCTL_INT(sec, name, member)                                                  \
  Field{sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = to_int(k, v); }}
#define RBCTL_U64(sec, name, member)                                                  \
  Field{sec, name, [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = to_unsigned(k, v); }}
#define RBCTL_BOOL(sec, name, member)                                            \
  Field{sec, name, [](const ExperimentConfig& c) { return from_bool(c.member); }, \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"problem", "family", [](const ExperimentConfig& c) { return c.family; },
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.family = trim(v); }},
      RBCTL_INT("problem", "n_y", n_y),
      RBCTL_DOUBLE("problem", "final_time", final_time),
      RBCTL_INT("problem", "steps_per_point", steps_per_point),
      RBCTL_DOUBLE("problem", "damping", damping),

      Field{"training", "counts", [](const ExperimentConfig& c) { return join_ints(c.train_counts); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.train_counts = parse_ints(k, v);
            }},
      Field{"training", "points", [](const ExperimentConfig& c) { return join_points(c.train_points); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.train_points = parse_points(k, v);
            }},

      RBCTL_DOUBLE("greedy", "tol", greedy_tol),
      RBCTL_INT("greedy", "max_basis", max_basis),
      RBCTL_DOUBLE("greedy", "cg_tol", cg_tol),
      RBCTL_DOUBLE("greedy", "svd_cg_tol", svd_cg_tol),
      RBCTL_BOOL("greedy", "reorthogonalize", reorthogonalize),
      RBCTL_BOOL("greedy", "track_true_errors", track_true_errors),

      RBCTL_INT("test", "count", test_count),
      RBCTL_U64("test", "seed", test_seed),
      RBCTL_BOOL("test", "certify", certify),
      RBCTL_BOOL("test", "time_runs", time_runs),

      Field{"surrogates", "models",
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.surrogates.size(); ++i) {
                out += (i ? "," : "") + to_string(c.surrogates[i]);
              }
              return out;
            },
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
              c.surrogates.clear();
              for (const auto& name : split(v, ',')) c.surrogates.push_back(regressor_kind_from_string(name));
            }},
      RBCTL_INT("surrogates", "enrich_count", enrich_count),
      RBCTL_U64("surrogates", "enrich_seed", enrich_seed),

      RBCTL_DOUBLE("kernel", "beta", kernel.beta),
      RBCTL_DOUBLE("kernel", "p_greedy_tol", kernel.p_greedy_tol),
      RBCTL_DOUBLE("kernel", "lambda", kernel.lambda),
      RBCTL_INT("kernel", "max_centers", kernel.max_centers),

      RBCTL_INT("gpr", "restarts", gpr.restarts),
      RBCTL_DOUBLE("gpr", "jitter", gpr.jitter),
      RBCTL_U64("gpr", "seed", gpr.seed),
      RBCTL_INT("gpr", "sweeps", gpr.sweeps),
      RBCTL_DOUBLE("gpr", "scale_low", gpr.scale_low),
      RBCTL_DOUBLE("gpr", "scale_high", gpr.scale_high),
      RBCTL_DOUBLE("gpr", "length_low", gpr.length_low),
      RBCTL_DOUBLE("gpr", "length_high", gpr.length_high),

      Field{"mlp", "hidden", [](const ExperimentConfig& c) { return join_ints(c.mlp.hidden); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.mlp.hidden = parse_ints(k, v);
            }},
      RBCTL_INT("mlp", "restarts", mlp.restarts),
      RBCTL_DOUBLE("mlp", "val_fraction", mlp.val_fraction),
      RBCTL_INT("mlp", "patience", mlp.patience),
      RBCTL_INT("mlp", "max_steps", mlp.max_steps),
      RBCTL_DOUBLE("mlp", "learning_rate", mlp.learning_rate),
      RBCTL_U64("mlp", "seed", mlp.seed),

      Field{"svd", "damping", [](const ExperimentConfig& c) { return join_doubles(c.svd_damping); },
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.svd_damping = parse_doubles(k, v);
            }},

      Field{"run", "output_dir", [](const ExperimentConfig& c) { return c.output_dir.string(); },
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); }},
      RBCTL_INT("run", "threads", threads),
  };
  return table;
}

#undef RBCTL_DOUBLE
#undef RBCTL_INT
#undef RBCTL_U64
#undef RBCTL_BOOL

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  const std::string family = trim(tree.get<std::string>("problem.family", "heat"));
  ExperimentConfig config = default_config(family);
  for (const auto& [section, entries] : tree) {
    if (!entries.data().empty()) {
      throw std::invalid_argument("config key '" + section + "' must live in a section");
    }
    for (const auto& [key, value] : entries) {
      const std::string full = section + "." + key;
      bool known = false;
      for (const Field& f : fields()) {
        if (section == f.section && key == f.key) {
          f.set(config, full, value.data());
          known = true;
          break;
        }
      }
      if (!known) throw std::invalid_argument("unknown config key '" + full + "'");
    }
  }
  config.validate();
  return config;
}

pt::ptree to_tree(const ExperimentConfig& config) {
  pt::ptree tree;
  for (const Field& f : fields()) {
    tree.put(pt::ptree::path_type(std::string(f.section) + "." + f.key, '.'), f.get(config));
  }
  return tree;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(family == "heat" || family == "wave", "problem.family must be heat or wave");
  require(n_y >= 2 && n_y <= 100000, "problem.n_y must be in [2, 100000]");
  require(final_time > 0.0 && std::isfinite(final_time), "problem.final_time must be positive");
  require(steps_per_point >= 1, "problem.steps_per_point must be >= 1");
  require(damping >= 0.0 && std::isfinite(damping), "problem.damping must be >= 0");
  const Eigen::Index p = family == "heat" ? 2 : 1;
  if (train_points.empty()) {
    require(static_cast<Eigen::Index>(train_counts.size()) == p,
            "training.counts needs one entry per parameter axis");
    for (int c : train_counts) require(c >= 1, "training.counts entries must be >= 1");
  } else {
    for (const Parameter& mu : train_points) {
      require(mu.size() == p, "training.points have the wrong dimension");
    }
  }
  require(greedy_tol > 0.0, "greedy.tol must be positive");
  require(max_basis >= 1, "greedy.max_basis must be >= 1");
  require(cg_tol > 0.0, "greedy.cg_tol must be positive");
  require(svd_cg_tol > 0.0, "greedy.svd_cg_tol must be positive");
  require(test_count >= 0, "test.count must be >= 0");
  require(enrich_count >= 0, "surrogates.enrich_count must be >= 0");
  require(kernel.beta > 0.0, "kernel.beta must be positive");
  require(kernel.p_greedy_tol >= 0.0, "kernel.p_greedy_tol must be >= 0");
  require(kernel.lambda >= 0.0, "kernel.lambda must be >= 0");
  require(kernel.max_centers >= 0, "kernel.max_centers must be >= 0");
  require(gpr.restarts >= 0, "gpr.restarts must be >= 0");
  require(gpr.jitter >= 0.0, "gpr.jitter must be >= 0");
  require(gpr.sweeps >= 1, "gpr.sweeps must be >= 1");
  require(gpr.scale_low > 0.0 && gpr.scale_low < gpr.scale_high, "gpr scale box is empty");
  require(gpr.length_low > 0.0 && gpr.length_low < gpr.length_high, "gpr length box is empty");
  for (int w : mlp.hidden) require(w >= 1, "mlp.hidden widths must be >= 1");
  require(mlp.restarts >= 1, "mlp.restarts must be >= 1");
  require(mlp.val_fraction >= 0.0 && mlp.val_fraction < 1.0, "mlp.val_fraction must be in [0, 1)");
  require(mlp.patience >= 1, "mlp.patience must be >= 1");
  require(mlp.max_steps >= 1, "mlp.max_steps must be >= 1");
  require(mlp.learning_rate > 0.0, "mlp.learning_rate must be positive");
  for (double nu : svd_damping) require(nu >= 0.0, "svd.damping entries must be >= 0");
  require(!output_dir.empty(), "run.output_dir must not be empty");
  require(threads >= 0, "run.threads must be >= 0");
}

int ExperimentConfig::thread_count() const { return threads == 0 ? available_threads() : threads; }

ExperimentConfig default_config(const std::string& family) {
  ExperimentConfig c;
  if (family == "heat") return c;
  if (family != "wave") throw std::invalid_argument("unknown problem family '" + family + "'");
  c.family = "wave";
  c.n_y = 100;
  c.final_time = 1.0;
  c.steps_per_point = 10;
  c.damping = 10.0;
  c.train_counts = {50};
  c.greedy_tol = 1e-2;
  c.cg_tol = 1e-9;
  // The undamped sweep stalls a little above 1e-9.
  c.svd_cg_tol = 1e-8;
  c.kernel.beta = 1.0;
  return c;
}

std::string config_to_string(const ExperimentConfig& config) {
  std::ostringstream out;
  pt::write_ini(out, to_tree(config));
  return out.str();
}

ExperimentConfig config_from_string(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_string(buf.str());
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << config_to_string(config);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rbctl
