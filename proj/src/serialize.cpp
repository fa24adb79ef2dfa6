#include "eulerprod/serialize.hpp"

#include <fstream>

#include "json.hpp"

namespace eulerprod::serialize {

using json = nlohmann::ordered_json;
using randmodel::Complex;
using randmodel::Ensemble;
using randmodel::EvalGrid;

namespace {

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

json grid_to_json_obj(const EvalGrid& g) {
  json j;
  j["center"] = complex_to_json(g.center);
  j["radius"] = g.radius;
  json b = json::array(), in = json::array();
  for (const auto& z : g.boundary) b.push_back(complex_to_json(z));
  for (const auto& z : g.interior) in.push_back(complex_to_json(z));
  j["boundary"] = b;
  j["interior"] = in;
  return j;
}

EvalGrid grid_from_json_obj(const json& j) {
  EvalGrid g;
  g.center = complex_from_json(j.at("center"));
  g.radius = j.at("radius").get<double>();
  for (const auto& z : j.at("boundary")) g.boundary.push_back(complex_from_json(z));
  for (const auto& z : j.at("interior")) g.interior.push_back(complex_from_json(z));
  return g;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": parse error: " + e.what());
  }
  return j;
}

void dump_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

char hexdigit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hash_string(uint64_t h) {
  std::string s = "0x";
  for (int i = 15; i >= 0; --i) s += hexdigit(h >> (4 * i));
  return s;
}

}  // namespace

std::string grid_to_json(const EvalGrid& grid) {
  return grid_to_json_obj(grid).dump(2);
}

EvalGrid grid_from_json_file(const std::string& path) {
  return grid_from_json_obj(load_json(path));
}

void write_ensemble(const Ensemble& e, const std::string& path) {
  json j;
  json meta;
  meta["method"] = e.method;
  meta["seed"] = e.seed;
  meta["N"] = e.n_smooth;
  meta["M"] = e.samples.size();
  meta["q"] = e.level;
  meta["weights"] = e.weights;
  meta["grid"] = grid_to_json_obj(e.grid);
  meta["grid_hash"] = hash_string(randmodel::grid_hash(e.grid));
  j["meta"] = meta;
  json samples = json::array();
  for (const auto& s : e.samples) {
    json row = json::array();
    for (const auto& z : s) row.push_back(complex_to_json(z));
    samples.push_back(row);
  }
  j["samples"] = samples;
  dump_json(j, path);
}

Ensemble read_ensemble(const std::string& path) {
  json j = load_json(path);
  Ensemble e;
  const json& meta = j.at("meta");
  e.method = meta.at("method").get<std::string>();
  e.seed = meta.at("seed").get<uint64_t>();
  e.n_smooth = meta.at("N").get<int64_t>();
  e.level = meta.value("q", int64_t{0});
  if (meta.contains("weights"))
    e.weights = meta["weights"].get<std::vector<double>>();
  e.grid = grid_from_json_obj(meta.at("grid"));
  size_t npts = e.grid.point_count();
  for (const auto& row : j.at("samples")) {
    std::vector<Complex> s;
    for (const auto& z : row) s.push_back(complex_from_json(z));
    if (s.size() != npts)
      throw std::invalid_argument(path + ": sample length does not match grid");
    e.samples.push_back(std::move(s));
  }
  return e;
}

experiments::TargetFunction read_target(const std::string& path,
                                        const EvalGrid& fallback_grid) {
  json j = load_json(path);
  std::string kind = j.at("kind").get<std::string>();
  EvalGrid domain = j.contains("grid") ? grid_from_json_obj(j["grid"]) : fallback_grid;
  if (kind == "const") {
    return experiments::make_constant_target(j.at("value").get<double>(), domain);
  }
  if (kind == "poly") {
    return experiments::make_poly_target(j.at("coeffs").get<std::vector<double>>(),
                                         domain);
  }
  if (kind == "tabulated") {
    std::vector<Complex> vals;
    for (const auto& z : j.at("values")) vals.push_back(complex_from_json(z));
    return experiments::make_tabulated_target(domain, std::move(vals),
                                              "file:" + path);
  }
  throw std::invalid_argument(path + ": unknown target kind '" + kind + "'");
}

void write_comparison_json(const experiments::ComparisonReport& rep,
                           const std::string& path) {
  json j;
  json meta;
  meta["q"] = rep.level;
  meta["model_seed"] = rep.model_seed;
  meta["family_N"] = rep.family_n;
  meta["model_N"] = rep.model_n;
  meta["family_size"] = rep.family_size;
  meta["model_size"] = rep.model_size;
  meta["grid_hash"] = hash_string(rep.grid_hash_value);
  j["meta"] = meta;
  j["aggregate_harmonic"] = rep.aggregate_harmonic;
  j["aggregate_natural"] = rep.aggregate_natural;
  json pts = json::array();
  for (size_t i = 0; i < rep.points.size(); ++i) {
    json p;
    p["point"] = complex_to_json(rep.points[i]);
    p["harmonic"] = {{"ks_re", rep.harmonic[i].ks_re},
                     {"ks_im", rep.harmonic[i].ks_im},
                     {"ks_logabs", rep.harmonic[i].ks_logabs}};
    p["natural"] = {{"ks_re", rep.natural[i].ks_re},
                    {"ks_im", rep.natural[i].ks_im},
                    {"ks_logabs", rep.natural[i].ks_logabs}};
    pts.push_back(p);
  }
  j["points"] = pts;
  dump_json(j, path);
}

void write_comparison_csv(const experiments::ComparisonReport& rep,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "point_re,point_im,ks_re_harmonic,ks_im_harmonic,ks_logabs_harmonic,"
         "ks_re_natural,ks_im_natural,ks_logabs_natural\n";
  char buf[512];
  for (size_t i = 0; i < rep.points.size(); ++i) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  rep.points[i].real(), rep.points[i].imag(),
                  rep.harmonic[i].ks_re, rep.harmonic[i].ks_im,
                  rep.harmonic[i].ks_logabs, rep.natural[i].ks_re,
                  rep.natural[i].ks_im, rep.natural[i].ks_logabs);
    out << buf;
  }
}

void write_support_trace_json(const experiments::SupportApproxTrace& tr,
                              const std::string& path) {
  json j;
  j["target"] = tr.target_desc;
  j["initial_residual"] = tr.initial_residual;
  j["tail_bound"] = tr.tail_bound;
  j["primes"] = tr.primes;
  j["theta"] = tr.theta;
  j["residual"] = tr.residual;
  dump_json(j, path);
}

void write_support_trace_csv(const experiments::SupportApproxTrace& tr,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "p,theta,residual\n";
  char buf[128];
  for (size_t i = 0; i < tr.primes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n",
                  static_cast<long long>(tr.primes[i]), tr.theta[i],
                  tr.residual[i]);
    out << buf;
  }
}

}  // namespace eulerprod::serialize
