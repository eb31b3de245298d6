#include "agepath/path_export.hpp"

#include "agepath/dataset.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace agepath {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array kLabels{SetLabel::E,  SetLabel::M,  SetLabel::D,      SetLabel::EN,
                             SetLabel::EZ, SetLabel::EP, SetLabel::active, SetLabel::inactive};

SetLabel parse_label(const std::string& s) {
  for (SetLabel l : kLabels)
    if (to_string(l) == s) return l;
  throw std::invalid_argument("unknown set label '" + s + "'");
}

// One token per index, space separated.
std::string encode_partition(const std::vector<SetLabel>& p) {
  std::string out;
  for (SetLabel l : p) {
    if (!out.empty()) out += ' ';
    out += to_string(l);
  }
  return out;
}

std::vector<SetLabel> decode_partition(const std::string& s) {
  std::vector<SetLabel> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t j = std::min(s.find(' ', i), s.size());
    out.push_back(parse_label(s.substr(i, j - i)));
    i = j + 1;
  }
  return out;
}

char region_of(SetLabel l) {
  switch (l) {
    case SetLabel::E:
    case SetLabel::EN:
    case SetLabel::EZ:
    case SetLabel::EP: return 'E';
    case SetLabel::M: return 'M';
    case SetLabel::D: return 'D';
    default: return 0;
  }
}

json meta_json(const AgePath& path) {
  const PathMeta& m = path.meta;
  json j;
  j["record"] = "meta";
  j["model"] = to_string(m.model);
  j["regularizer"] = {{"family", to_string(m.reg.family)}, {"gamma", m.reg.gamma}};
  j["hyper"] = {{"C", m.hyper.C},
                {"alpha", m.hyper.alpha},
                {"kernel", m.hyper.kernel.kind == KernelKind::linear ? "linear" : "gaussian"},
                {"kernel_gamma", m.hyper.kernel.gamma}};
  j["lambda_min"] = m.lambda_min;
  j["lambda_max"] = m.lambda_max;
  j["n"] = m.n;
  j["tolerances"] = {{"kkt_tol", m.cfg.kkt_tol}, {"rtol", m.cfg.rtol},          {"atol", m.cfg.atol},
                     {"delta", m.cfg.delta},     {"probe", m.cfg.probe},        {"max_step", m.cfg.max_step},
                     {"monitor_floor", m.cfg.monitor_floor}};
  j["param_names"] = m.param_names;
  j["counts"] = {{"points", path.points.size()},
                 {"turning", path.turning_count()},
                 {"jump", path.jump_count()},
                 {"restarts", path.restart_count()}};
  return j;
}

json event_json(const CriticalEvent& e) {
  json v = json::array();
  for (const auto& x : e.violators)
    v.push_back({{"index", x.index}, {"feature", x.feature}, {"from", to_string(x.from)}, {"to", to_string(x.to)}});
  return {{"lambda", e.lambda}, {"kind", to_string(e.kind)}, {"restarted", e.restarted}, {"violators", v}};
}

CriticalEvent event_from(const json& j) {
  CriticalEvent e;
  e.lambda = j.at("lambda").get<double>();
  e.kind = j.at("kind").get<std::string>() == "jump" ? EventKind::jump : EventKind::turning;
  e.restarted = j.at("restarted").get<bool>();
  for (const auto& v : j.at("violators"))
    e.violators.push_back({v.at("index").get<Eigen::Index>(), v.at("feature").get<bool>(),
                           parse_label(v.at("from").get<std::string>()), parse_label(v.at("to").get<std::string>())});
  return e;
}

}  // namespace

void write_jsonl(std::ostream& os, const AgePath& path) {
  os << meta_json(path).dump() << '\n';
  const auto& names = path.meta.param_names;
  std::size_t ev = 0;
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    const PathPoint& p = path.points[k];
    json j;
    j["record"] = "point";
    j["lambda"] = p.lambda;
    json params;
    for (Eigen::Index i = 0; i < p.params.size(); ++i)
      params[static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : "p_" + std::to_string(i + 1)] =
          p.params(i);
    j["params"] = params;
    std::map<char, int> count{{'E', 0}, {'M', 0}, {'D', 0}};
    for (SetLabel l : p.partition)
      if (char r = region_of(l)) ++count[r];
    j["v_summary"] = {{"mean", p.weights.size() ? p.weights.mean() : 0.0},
                      {"count_E", count['E']},
                      {"count_M", count['M']},
                      {"count_D", count['D']}};
    j["segment"] = p.segment;
    j["partition"] = encode_partition(p.partition);
    // events up to this point that no earlier point claimed
    json evs = json::array();
    const bool last = k + 1 == path.points.size();
    while (ev < path.events.size() && (path.events[ev].lambda <= p.lambda || last)) evs.push_back(event_json(path.events[ev++]));
    if (evs.size() == 1) j["event"] = evs[0];
    if (evs.size() > 1) j["event"] = evs;
    os << j.dump() << '\n';
  }
}

void write_csv(std::ostream& os, const AgePath& path) {
  os << "lambda";
  for (const auto& n : path.meta.param_names) os << ',' << n;
  os << '\n';
  char buf[32];
  for (const auto& p : path.points) {
    std::snprintf(buf, sizeof buf, "%.17g", p.lambda);
    os << buf;
    for (double v : p.params) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

AgePath read_jsonl(std::istream& is) {
  AgePath path;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
    try {
      const std::string rec = j.at("record").get<std::string>();
      if (rec == "meta") {
        PathMeta& m = path.meta;
        m.model = parse_model(j.at("model").get<std::string>());
        m.reg.family = parse_family(j.at("regularizer").at("family").get<std::string>());
        m.reg.gamma = j.at("regularizer").at("gamma").get<double>();
        const json& h = j.at("hyper");
        m.hyper.C = h.at("C").get<double>();
        m.hyper.alpha = h.at("alpha").get<double>();
        m.hyper.kernel.kind = h.at("kernel").get<std::string>() == "linear" ? KernelKind::linear : KernelKind::gaussian;
        m.hyper.kernel.gamma = h.at("kernel_gamma").get<double>();
        m.lambda_min = j.at("lambda_min").get<double>();
        m.lambda_max = j.at("lambda_max").get<double>();
        m.n = j.at("n").get<Eigen::Index>();
        const json& t = j.at("tolerances");
        m.cfg.kkt_tol = t.at("kkt_tol").get<double>();
        m.cfg.rtol = t.at("rtol").get<double>();
        m.cfg.atol = t.at("atol").get<double>();
        m.cfg.delta = t.at("delta").get<double>();
        m.cfg.probe = t.at("probe").get<double>();
        m.cfg.max_step = t.at("max_step").get<double>();
        m.cfg.monitor_floor = t.at("monitor_floor").get<double>();
        m.param_names = j.at("param_names").get<std::vector<std::string>>();
        have_meta = true;
        continue;
      }
      if (rec != "point") throw ParseError("unknown record '" + rec + "'", lineno);
      if (!have_meta) throw ParseError("point before the metadata header", lineno);
      PathPoint p;
      p.lambda = j.at("lambda").get<double>();
      const json& params = j.at("params");
      p.params.resize(static_cast<Eigen::Index>(params.size()));
      Eigen::Index i = 0;
      for (const auto& [name, v] : params.items()) p.params(i++) = v.get<double>();
      p.segment = j.at("segment").get<int>();
      p.partition = decode_partition(j.at("partition").get<std::string>());
      if (!path.points.empty() && p.lambda <= path.points.back().lambda)
        throw ParseError("lambda not increasing", lineno);
      path.points.push_back(std::move(p));
      if (j.contains("event")) {
        const json& e = j.at("event");
        if (e.is_array())
          for (const auto& x : e) path.events.push_back(event_from(x));
        else
          path.events.push_back(event_from(e));
      }
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!have_meta) throw ParseError("missing metadata header", lineno);
  return path;
}

void write_jsonl(const std::string& file, const AgePath& path) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  write_jsonl(os, path);
  if (!os) throw std::runtime_error("write failed: " + file);
}

void write_csv(const std::string& file, const AgePath& path) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  write_csv(os, path);
  if (!os) throw std::runtime_error("write failed: " + file);
}

AgePath read_jsonl(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file);
  return read_jsonl(is);
}

}  // namespace agepath
