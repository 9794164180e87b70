#ifndef RELAYSIM_MLP_HPP
#define RELAYSIM_MLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

/// Affine normalization x -> (x - mean) / scale.
struct Normalization {
  double mean = 0.0;
  double scale = 1.0;
};

/// One-input, one-output multilayer perceptron with a single sigmoid hidden
/// layer and a linear output.  Normalizations map the physical input into the
/// layer and the linear output back to physical units.
struct MlpModel {
  static constexpr int kDefaultHidden = 85;

  std::vector<double> w1;  // hidden weights
  std::vector<double> b1;  // hidden biases
  std::vector<double> w2;  // output weights
  double b2 = 0.0;         // output bias
  Normalization input_norm;
  Normalization output_norm;

  int hidden_units() const { return static_cast<int>(w1.size()); }

  static MlpModel zeros(int hidden = kDefaultHidden) {
    MlpModel m;
    m.w1.assign(static_cast<std::size_t>(hidden), 0.0);
    m.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    m.w2.assign(static_cast<std::size_t>(hidden), 0.0);
    return m;
  }
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Uniform draw in [0, 1) using the top 53 bits of the engine, so results do
/// not depend on the standard library's distribution implementations.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Bounded draw for a portable Fisher-Yates shuffle.
inline std::size_t bounded(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>(gen() % n);
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Network response to one physical input.
inline double mlp_forward(const MlpModel& m, double x) {
  const double xa = (x - m.input_norm.mean) / m.input_norm.scale;
  double acc = m.b2;
  for (std::size_t i = 0; i < m.w1.size(); ++i) {
    acc += m.w2[i] * detail::sigmoid(m.w1[i] * xa + m.b1[i]);
  }
  return acc * m.output_norm.scale + m.output_norm.mean;
}

/// Parameter gradient of the squared-error loss L = (y - target)^2 / 2 for a
/// single sample, with y in physical units.
struct MlpGradient {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  static MlpGradient zeros(int hidden) {
    MlpGradient g;
    g.w1.assign(static_cast<std::size_t>(hidden), 0.0);
    g.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    g.w2.assign(static_cast<std::size_t>(hidden), 0.0);
    return g;
  }

  void accumulate(const MlpGradient& o, double weight) {
    for (std::size_t i = 0; i < w1.size(); ++i) {
      w1[i] += weight * o.w1[i];
      b1[i] += weight * o.b1[i];
      w2[i] += weight * o.w2[i];
    }
    b2 += weight * o.b2;
  }
};

inline MlpGradient mlp_gradient(const MlpModel& m, double x, double target) {
  const double xa = (x - m.input_norm.mean) / m.input_norm.scale;
  const double y = mlp_forward(m, x);
  const double up = (y - target) * m.output_norm.scale;  // dL/d(linear out)
  MlpGradient g = MlpGradient::zeros(m.hidden_units());
  for (std::size_t i = 0; i < m.w1.size(); ++i) {
    const double h = detail::sigmoid(m.w1[i] * xa + m.b1[i]);
    g.w2[i] = up * h;
    const double back = up * m.w2[i] * h * (1.0 - h);
    g.b1[i] = back;
    g.w1[i] = back * xa;
  }
  g.b2 = up;
  return g;
}

/// Immutable training table mapping wind speed to the desired zone-2 reach
/// magnitude.  Speeds must be distinct, within [0, 30] m/s; targets positive.
class Dataset {
 public:
  struct Row {
    double speed_mps;
    double target_ohm;
  };

  void add(double speed_mps, double target_ohm) {
    if (!(speed_mps >= 0.0 && speed_mps <= 30.0)) {
      throw InputError("speed outside [0, 30] m/s");
    }
    if (!(target_ohm > 0.0)) {
      throw InputError("target reach must be positive");
    }
    for (const Row& r : rows_) {
      if (r.speed_mps == speed_mps) {
        throw InputError("duplicate speed in dataset");
      }
    }
    rows_.push_back(Row{speed_mps, target_ohm});
  }

  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<Row> rows_;
};

/// Gradient-descent controls.  The train fraction is restricted to the
/// customary 60-70% band.
struct TrainingConfig {
  double train_fraction = 0.65;
  double learning_rate = 0.5;
  int max_epochs = 2000;
  double target_rmse = 0.0;  // <= 0 disables early stopping
  std::uint64_t seed = 1;
  int hidden_units = MlpModel::kDefaultHidden;
};

inline void validate(const TrainingConfig& cfg) {
  if (!(cfg.train_fraction >= 0.6 && cfg.train_fraction <= 0.7)) {
    throw std::invalid_argument("train fraction must lie in [0.6, 0.7]");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (cfg.max_epochs < 1) {
    throw std::invalid_argument("need at least one epoch");
  }
  if (cfg.hidden_units < 1) {
    throw std::invalid_argument("need at least one hidden unit");
  }
}

/// Deterministic train/validation split: Fisher-Yates over row indices with
/// the config seed, first `round(fraction * n)` indices train, rest validate.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
train_val_split(std::size_t n, const TrainingConfig& cfg) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 gen(cfg.seed);
  for (std::size_t i = n; i-- > 1;) {
    std::swap(idx[i], idx[detail::bounded(gen, i + 1)]);
  }
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(cfg.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  return {std::vector<std::size_t>(idx.begin(), idx.begin() + n_train),
          std::vector<std::size_t>(idx.begin() + n_train, idx.end())};
}

struct EpochStats {
  double train_rmse = 0.0;
  double val_rmse = 0.0;
};

struct TrainingReport {
  std::vector<EpochStats> curve;  // one entry per completed epoch
  double final_train_rmse = 0.0;
  double final_val_rmse = 0.0;
  int epochs = 0;
  bool hit_target = false;
};

namespace detail {

inline double rmse_over(const MlpModel& m, const Dataset& data,
                        const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i : idx) {
    const Dataset::Row& r = data.rows()[i];
    const double e = mlp_forward(m, r.speed_mps) - r.target_ohm;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(idx.size()));
}

}  // namespace detail

/// Full-batch gradient descent with an adaptive step: an epoch whose update
/// would raise the training loss is rejected and the learning rate halved,
/// while every accepted epoch grows the rate slightly, so the schedule can
/// recover after an early overshoot and the recorded training loss never
/// increases.  Throws DatasetTooSmall below 20 rows and Diverged if the loss
/// or any parameter goes non-finite.
inline std::pair<MlpModel, TrainingReport> train(const Dataset& data,
                                                 const TrainingConfig& cfg) {
  validate(cfg);
  if (data.size() < 20) {
    throw DatasetTooSmall("training needs at least 20 rows");
  }
  const auto [train_idx, val_idx] = train_val_split(data.size(), cfg);

  MlpModel m = MlpModel::zeros(cfg.hidden_units);
  {
    double lo = data.rows()[0].speed_mps, hi = lo;
    for (const Dataset::Row& r : data.rows()) {
      lo = std::min(lo, r.speed_mps);
      hi = std::max(hi, r.speed_mps);
    }
    m.input_norm.mean = (lo + hi) / 2.0;
    m.input_norm.scale = hi > lo ? (hi - lo) / 2.0 : 1.0;

    double mean = 0.0;
    for (const Dataset::Row& r : data.rows()) mean += r.target_ohm;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const Dataset::Row& r : data.rows()) {
      var += (r.target_ohm - mean) * (r.target_ohm - mean);
    }
    var /= static_cast<double>(data.size());
    m.output_norm.mean = mean;
    // Zero-variance targets are represented exactly by the normalization
    // mean; a tiny (not unit) scale then pins the physical output to that
    // constant no matter where the normalized network wanders.
    m.output_norm.scale = var > 0.0 ? std::sqrt(var) : 1e-9;
  }

  std::mt19937_64 gen(cfg.seed);
  auto init = [&gen](std::vector<double>& v) {
    for (double& x : v) x = detail::uniform01(gen) - 0.5;
  };
  init(m.w1);
  init(m.b1);
  init(m.w2);
  m.b2 = detail::uniform01(gen) - 0.5;

  // All descent happens on the normalized-space mean squared error; the
  // physical-space per-sample gradient differs only by the constant factor
  // output_scale^2, which the learning rate absorbs.
  const double inv_n = 1.0 / static_cast<double>(train_idx.size());
  auto norm_loss = [&](const MlpModel& model) {
    double acc = 0.0;
    for (std::size_t i : train_idx) {
      const Dataset::Row& r = data.rows()[i];
      const double ya = (mlp_forward(model, r.speed_mps) -
                         model.output_norm.mean) /
                        model.output_norm.scale;
      const double ta =
          (r.target_ohm - model.output_norm.mean) / model.output_norm.scale;
      acc += (ya - ta) * (ya - ta);
    }
    return 0.5 * acc * inv_n;
  };

  TrainingReport report;
  double lr = cfg.learning_rate;
  double loss = norm_loss(m);
  if (!std::isfinite(loss)) throw Diverged("initial loss is not finite");

  const int h = cfg.hidden_units;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Batch gradient of the normalized loss.
    MlpGradient g = MlpGradient::zeros(h);
    const double sy2 =
        m.output_norm.scale * m.output_norm.scale;  // physical -> normalized
    for (std::size_t i : train_idx) {
      const Dataset::Row& r = data.rows()[i];
      g.accumulate(mlp_gradient(m, r.speed_mps, r.target_ohm), inv_n / sy2);
    }

    MlpModel cand = m;
    for (int i = 0; i < h; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      cand.w1[u] -= lr * g.w1[u];
      cand.b1[u] -= lr * g.b1[u];
      cand.w2[u] -= lr * g.w2[u];
    }
    cand.b2 -= lr * g.b2;

    const double cand_loss = norm_loss(cand);
    if (!std::isfinite(cand_loss)) throw Diverged("loss became non-finite");
    if (cand_loss > loss) {
      lr *= 0.5;  // reject the step, try again more cautiously
    } else {
      m = std::move(cand);
      loss = cand_loss;
      lr *= 1.1;  // reward progress so the rate recovers after halvings
    }

    EpochStats stats;
    stats.train_rmse = detail::rmse_over(m, data, train_idx);
    stats.val_rmse = detail::rmse_over(m, data, val_idx);
    report.curve.push_back(stats);
    report.epochs = epoch + 1;
    if (cfg.target_rmse > 0.0 && stats.val_rmse <= cfg.target_rmse) {
      report.hit_target = true;
      break;
    }
  }
  for (double v : m.w1) {
    if (!std::isfinite(v)) throw Diverged("parameters became non-finite");
  }
  report.final_train_rmse = report.curve.back().train_rmse;
  report.final_val_rmse = report.curve.back().val_rmse;
  return {std::move(m), std::move(report)};
}

// --- persistence ------------------------------------------------------------
//
// Plain-text format, whitespace separated, 17 significant digits:
//   mlp 1 <hidden> 1 <in_mean> <in_scale> <out_mean> <out_scale>
//   w1[0] ... w1[h-1]
//   b1[0] ... b1[h-1]
//   w2[0] ... w2[h-1]
//   b2

inline void save_model(const MlpModel& m, std::ostream& os) {
  os << "mlp 1 " << m.hidden_units() << " 1 "
     << detail::format_g17(m.input_norm.mean) << ' '
     << detail::format_g17(m.input_norm.scale) << ' '
     << detail::format_g17(m.output_norm.mean) << ' '
     << detail::format_g17(m.output_norm.scale) << '\n';
  auto row = [&os](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << (i ? " " : "") << detail::format_g17(v[i]);
    }
    os << '\n';
  };
  row(m.w1);
  row(m.b1);
  row(m.w2);
  os << detail::format_g17(m.b2) << '\n';
}

inline void save_model(const MlpModel& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open model file for writing: " + path);
  save_model(m, os);
  if (!os.good()) throw InputError("failed writing model file: " + path);
}

inline MlpModel load_model(std::istream& is) {
  std::string magic;
  int n_in = 0, hidden = 0, n_out = 0;
  MlpModel m;
  if (!(is >> magic >> n_in >> hidden >> n_out >> m.input_norm.mean >>
        m.input_norm.scale >> m.output_norm.mean >> m.output_norm.scale)) {
    throw ModelFormatError("malformed model header");
  }
  if (magic != "mlp" || n_in != 1 || n_out != 1 || hidden < 1) {
    throw ModelFormatError("unsupported model layout");
  }
  if (!(m.input_norm.scale > 0.0) || !(m.output_norm.scale > 0.0)) {
    throw ModelFormatError("normalization scales must be positive");
  }
  auto read_all = [&is](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) {
      if (!(is >> x)) throw ModelFormatError("model file truncated");
      if (!std::isfinite(x)) throw ModelFormatError("non-finite parameter");
    }
  };
  const std::size_t h = static_cast<std::size_t>(hidden);
  read_all(m.w1, h);
  read_all(m.b1, h);
  read_all(m.w2, h);
  if (!(is >> m.b2)) throw ModelFormatError("model file truncated");
  if (!std::isfinite(m.b2)) throw ModelFormatError("non-finite parameter");
  std::string extra;
  if (is >> extra) throw ModelFormatError("trailing data in model file");
  return m;
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open model file: " + path);
  return load_model(is);
}

}  // namespace relaysim

#endif  // RELAYSIM_MLP_HPP
