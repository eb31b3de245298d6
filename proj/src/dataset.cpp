#include "agepath/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace agepath {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

double parse_number(std::string_view tok, std::size_t line) {
  const std::string t(trim(tok));
  if (t.empty()) throw ParseError("empty field", line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw ParseError("cannot parse '" + t + "' as a number", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + t + "'", line);
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(sep, pos);
    if (c == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

Vector remap_labels(Vector y) {
  bool pm = true, zo = true;
  for (double v : y) {
    pm = pm && (v == 1.0 || v == -1.0);
    zo = zo && (v == 0.0 || v == 1.0);
  }
  if (pm) return y;
  if (zo) return (2.0 * y.array() - 1.0).matrix();
  throw std::invalid_argument("classification labels must be {-1,+1} or {0,1}");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset::Dataset(Matrix features, Vector targets, Task task, std::vector<std::string> names)
    : X_(std::move(features)), y_(std::move(targets)), task_(task), names_(std::move(names)) {
  if (X_.rows() < 1 || X_.cols() < 1) throw std::invalid_argument("dataset needs n >= 1 and d >= 1");
  if (y_.size() != X_.rows())
    throw std::invalid_argument("dataset: " + std::to_string(y_.size()) + " targets for " +
                                std::to_string(X_.rows()) + " rows");
  if (!X_.allFinite() || !y_.allFinite()) throw std::invalid_argument("dataset: non-finite entry");
  if (task_ == Task::classification)
    for (double v : y_)
      if (v != 1.0 && v != -1.0) throw std::invalid_argument("dataset: classification targets must be +-1");
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != X_.cols())
    throw std::invalid_argument("dataset: feature name count does not match d");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Matrix X(static_cast<Eigen::Index>(rows.size()), d());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = X_.row(rows[i]);
    y(static_cast<Eigen::Index>(i)) = y_(rows[i]);
  }
  Dataset out(std::move(X), std::move(y), task_, names_);
  out.std_ = std_;
  return out;
}

Dataset Dataset::with_targets(Vector targets) const {
  Dataset out(X_, std::move(targets), task_, names_);
  out.std_ = std_;
  return out;
}

Dataset standardize(const Dataset& ds) {
  Standardization s;
  const double n = static_cast<double>(ds.n());
  s.mean = ds.X().colwise().mean().transpose();
  s.scale = Vector::Ones(ds.d());
  Matrix X = ds.X();
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    X.col(j).array() -= s.mean(j);
    const double sd = std::sqrt(X.col(j).squaredNorm() / n);
    if (sd > 0.0) {
      s.scale(j) = sd;
      X.col(j) /= sd;
    }
  }
  Dataset out(std::move(X), ds.y(), ds.task(), ds.feature_names());
  out.std_ = std::move(s);
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.task_ == b.task_ && a.X_.rows() == b.X_.rows() && a.X_.cols() == b.X_.cols() &&
         a.X_ == b.X_ && a.y_ == b.y_;
}

Dataset parse_csv(std::string_view text, Task task) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size()) throw ParseError("empty file", 1);
  const auto header = split_fields(lines[i], ',');
  if (header.size() < 2) throw ParseError("need at least one feature column and a target", i + 1);
  const std::size_t cols = header.size();
  std::vector<std::string> names;
  for (std::size_t c = 0; c + 1 < cols; ++c) names.emplace_back(trim(header[c]));

  std::vector<double> vals;
  std::vector<double> ys;
  for (++i; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto f = split_fields(lines[i], ',');
    if (f.size() != cols)
      throw ParseError("expected " + std::to_string(cols) + " columns, found " + std::to_string(f.size()),
                       i + 1);
    for (std::size_t c = 0; c + 1 < cols; ++c) vals.push_back(parse_number(f[c], i + 1));
    ys.push_back(parse_number(f[cols - 1], i + 1));
  }
  if (ys.empty()) throw ParseError("no data rows", i);
  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto d = static_cast<Eigen::Index>(cols - 1);
  Matrix X = Eigen::Map<Matrix>(vals.data(), n, d);
  Vector y = Eigen::Map<Vector>(ys.data(), n);
  if (task == Task::classification) y = remap_labels(std::move(y));
  return Dataset(std::move(X), std::move(y), task, std::move(names));
}

Dataset parse_libsvm(std::string_view text, Task task, Eigen::Index d) {
  struct Row {
    double y;
    std::vector<std::pair<Eigen::Index, double>> entries;
  };
  std::vector<Row> rows;
  Eigen::Index max_idx = 0;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream in{std::string(line)};
    std::string tok;
    in >> tok;
    Row r{parse_number(tok, i + 1), {}};
    while (in >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", i + 1);
      const double idx = parse_number(std::string_view(tok).substr(0, colon), i + 1);
      if (idx < 1 || idx != std::floor(idx)) throw ParseError("bad feature index '" + tok + "'", i + 1);
      const auto j = static_cast<Eigen::Index>(idx);
      r.entries.emplace_back(j - 1, parse_number(std::string_view(tok).substr(colon + 1), i + 1));
      max_idx = std::max(max_idx, j);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("empty file", 1);
  if (d == 0) d = max_idx;
  if (max_idx > d) throw std::invalid_argument("libsvm: feature index exceeds d");
  Matrix X = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), d);
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = rows[i].y;
    for (auto [j, v] : rows[i].entries) X(static_cast<Eigen::Index>(i), j) = v;
  }
  if (task == Task::classification) y = remap_labels(std::move(y));
  return Dataset(std::move(X), std::move(y), task);
}

Dataset load(const std::string& path, FileFormat format, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return format == FileFormat::csv ? parse_csv(text, task) : parse_libsvm(text, task);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    out += ds.feature_names().empty() ? "x" + std::to_string(j + 1) : ds.feature_names()[j];
    out += ',';
  }
  out += "y\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      out += fmt17(ds.X()(i, j));
      out += ',';
    }
    out += fmt17(ds.y()(i));
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << to_csv(ds);
}

NoisyDataset inject_noise(const Dataset& ds, const NoiseSpec& spec) {
  if (!(spec.ratio >= 0.0 && spec.ratio <= 1.0)) throw std::invalid_argument("noise ratio must be in [0,1]");
  if (spec.kind == NoiseKind::label_flip && ds.task() != Task::classification)
    throw std::invalid_argument("label_flip noise needs a classification dataset");
  if (spec.kind == NoiseKind::target_perturb && ds.task() != Task::regression)
    throw std::invalid_argument("target_perturb noise needs a regression dataset");

  const auto n = ds.n();
  const auto k = static_cast<Eigen::Index>(std::floor(spec.ratio * static_cast<double>(n) + 0.5));
  std::mt19937_64 rng(spec.seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Eigen::Index> chosen(idx.begin(), idx.begin() + k);
  std::sort(chosen.begin(), chosen.end());

  Vector y = ds.y();
  if (spec.kind == NoiseKind::label_flip) {
    for (auto i : chosen) y(i) = -y(i);
  } else {
    const double mu = ds.y().mean();
    const double var = (ds.y().array() - mu).square().mean();
    std::normal_distribution<double> draw(mu, std::sqrt(var));
    for (auto i : chosen) y(i) = draw(rng);
  }
  return {ds.with_targets(std::move(y)), std::move(chosen)};
}

Synthetic synthesize(Eigen::Index n, Eigen::Index d, Task task, std::uint64_t seed,
                     const SynthOptions& opt) {
  if (n < 2 || d < 1) throw std::invalid_argument("synthesize needs n >= 2 and d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(n, d);
  Synthetic out;
  if (task == Task::regression) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = gauss(rng);
    if (opt.w0) {
      if (opt.w0->size() != d) throw std::invalid_argument("synthesize: w0 has wrong length");
      out.w0 = *opt.w0;
    } else {
      out.w0.resize(d);
      for (Eigen::Index j = 0; j < d; ++j) out.w0(j) = opt.w0_scale * gauss(rng);
    }
    Vector y = X * out.w0;
    for (Eigen::Index i = 0; i < n; ++i) y(i) += opt.noise_scale * gauss(rng);
    out.data = Dataset(std::move(X), std::move(y), task);
  } else {
    out.centre = Vector::Constant(d, 0.5 * opt.separation / std::sqrt(static_cast<double>(d)));
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = i % 2 == 0 ? 1.0 : -1.0;
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = y(i) * out.centre(j) + gauss(rng);
    }
    out.w0 = Vector::Zero(d);
    out.data = Dataset(std::move(X), std::move(y), task);
  }
  return out;
}

SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train fraction must lie in (0,1)");
  const auto n = ds.n();
  const auto k = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  if (k < 1 || k >= n) throw std::invalid_argument("split would leave one side empty");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  SplitResult out;
  out.train_rows.assign(idx.begin(), idx.begin() + k);
  out.test_rows.assign(idx.begin() + k, idx.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = ds.subset(out.train_rows);
  out.test = ds.subset(out.test_rows);
  return out;
}

SynthDescriptor read_descriptor(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  SynthDescriptor d;
  d.n = j.at("n").get<Eigen::Index>();
  d.d = j.at("d").get<Eigen::Index>();
  d.task = parse_task(j.at("task").get<std::string>());
  d.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("w0") && !j["w0"].is_null()) {
    const auto w = j["w0"].get<std::vector<double>>();
    d.w0 = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  }
  return d;
}

std::string write_descriptor(const SynthDescriptor& desc) {
  nlohmann::json j;
  j["n"] = desc.n;
  j["d"] = desc.d;
  j["task"] = std::string(to_string(desc.task));
  j["seed"] = desc.seed;
  if (desc.w0) j["w0"] = std::vector<double>(desc.w0->begin(), desc.w0->end());
  return j.dump();
}

Synthetic synthesize(const SynthDescriptor& desc, SynthOptions opt) {
  if (desc.w0) opt.w0 = desc.w0;
  return synthesize(desc.n, desc.d, desc.task, desc.seed, opt);
}

std::string_view to_string(Task t) { return t == Task::classification ? "classification" : "regression"; }

Task parse_task(std::string_view s) {
  if (s == "classification") return Task::classification;
  if (s == "regression") return Task::regression;
  throw std::invalid_argument("unknown task '" + std::string(s) + "'");
}

}  // namespace agepath
