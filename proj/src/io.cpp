#include "isoembed/io.hpp"

#include <fstream>
#include <iomanip>

#include "isoembed/errors.hpp"

namespace isoembed {

using nlohmann::json;

namespace {

const char* rank_name(Rank r) {
  switch (r) {
    case Rank::scalar: return "scalar";
    case Rank::vector: return "vector";
    default: return "symmetric2tensor";
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where + "/" + key + ": " + e.what());
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace

json grid_to_json(const GridSpec& g) {
  std::vector<double> b;
  for (int i = 0; i < g.n(); ++i)
    for (int k = 0; k < g.n(); ++k) b.push_back(g.lattice.basis()(i, k));
  return {{"lattice", b}, {"resolution", g.res}};
}

GridSpec grid_from_json(const json& j) {
  try {
    return GridSpec(Lattice::from_row_major(get<std::vector<double>>(j, "lattice", "grid")),
                    get<std::vector<int>>(j, "resolution", "grid"));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("grid: ") + e.what());
  }
}

json field_to_json(const PeriodicField& f) {
  json s = json::array();
  for (int c = 0; c < f.comps; ++c) s.push_back(std::vector<double>(f.comp(c), f.comp(c) + f.size()));
  return {{"grid", grid_to_json(f.grid)}, {"rank", rank_name(f.rank)}, {"components", f.comps}, {"samples", s}};
}

PeriodicField field_from_json(const json& j) {
  GridSpec g = grid_from_json(get<json>(j, "grid", "field"));
  std::string rn = get<std::string>(j, "rank", "field");
  Rank r = rn == "scalar" ? Rank::scalar : rn == "vector" ? Rank::vector : Rank::sym2;
  if (rn != "scalar" && rn != "vector" && rn != "symmetric2tensor") throw FormatError("field/rank: unknown rank " + rn);
  int comps = get<int>(j, "components", "field");
  auto samples = get<std::vector<std::vector<double>>>(j, "samples", "field");
  if (static_cast<int>(samples.size()) != comps) throw FormatError("field/samples: component count mismatch");
  PeriodicField f(g, r, comps);
  for (int c = 0; c < comps; ++c) {
    if (samples[c].size() != g.size()) throw FormatError("field/samples/" + std::to_string(c) + ": wrong length");
    std::copy(samples[c].begin(), samples[c].end(), f.comp(c));
  }
  return f;
}

PeriodicField load_field(const std::string& path) { return field_from_json(read_json(path)); }

json map_to_json(const EquivariantMap& u) {
  std::vector<double> a;
  for (int k = 0; k < u.q(); ++k)
    for (int i = 0; i < u.n(); ++i) a.push_back(u.A(k, i));
  return {{"format", "equivariant-map"}, {"q", u.q()}, {"affine", a}, {"periodic", field_to_json(u.phi)}};
}

EquivariantMap map_from_json(const json& j) {
  if (get<std::string>(j, "format", "map") != "equivariant-map") throw FormatError("map/format: unexpected value");
  int q = get<int>(j, "q", "map");
  PeriodicField phi = field_from_json(get<json>(j, "periodic", "map"));
  auto a = get<std::vector<double>>(j, "affine", "map");
  const int n = phi.grid.n();
  if (phi.comps != q || static_cast<int>(a.size()) != q * n) throw FormatError("map: shape mismatch");
  Mat A(q, n);
  for (int k = 0; k < q; ++k)
    for (int i = 0; i < n; ++i) A(k, i) = a[k * n + i];
  return EquivariantMap(phi.grid, A, phi);
}

EquivariantMap load_map(const std::string& path) { return map_from_json(read_json(path)); }

json decomposition_to_json(const PropertyEDecomposition& d) {
  json terms = json::array();
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    const auto& t = d.terms[i];
    terms.push_back({{"chart", {{"index", t.chart.index},
                                {"center", std::vector<double>(t.chart.center.data(), t.chart.center.data() + t.chart.center.size())},
                                {"radius", t.chart.radius}}},
                     {"form", std::vector<double>(t.f.data(), t.f.data() + t.f.size())},
                     {"c_min", t.c_min},
                     {"coefficient", field_to_json(t.a)}});
  }
  return {{"reconstruction_error", d.reconstruction_error}, {"target_norm", d.target_norm},
          {"min_coefficient", d.min_coefficient}, {"per_direction", d.per_direction},
          {"refinements", d.refinements}, {"terms", terms}};
}

void write_samples_csv(const EquivariantMap& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot write");
  out << std::setprecision(17);
  for (int i = 0; i < u.n(); ++i) out << (i ? "," : "") << "x" << i + 1;
  for (int k = 0; k < u.q(); ++k) out << ",u" << k + 1;
  out << "\n";
  for (std::size_t p = 0; p < u.grid.size(); ++p) {
    Vec x = u.grid.point(p), v = u.sample(p);
    for (int i = 0; i < u.n(); ++i) out << (i ? "," : "") << x(i);
    for (int k = 0; k < u.q(); ++k) out << "," << v(k);
    out << "\n";
  }
}

void write_projected3d_csv(const EquivariantMap& u, const std::string& path) {
  const std::size_t P = u.grid.size();
  Mat X(P, u.q());
  for (std::size_t p = 0; p < P; ++p) X.row(p) = u.sample(p).transpose();
  Vec mean = X.colwise().mean();
  X.rowwise() -= mean.transpose();
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinV);
  const int k = std::min<int>(3, static_cast<int>(svd.matrixV().cols()));
  Mat Y = X * svd.matrixV().leftCols(k);
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot write");
  out << std::setprecision(17);
  for (int i = 0; i < u.n(); ++i) out << (i ? "," : "") << "x" << i + 1;
  out << ",pc1,pc2,pc3\n";
  for (std::size_t p = 0; p < P; ++p) {
    Vec x = u.grid.point(p);
    for (int i = 0; i < u.n(); ++i) out << (i ? "," : "") << x(i);
    for (int c = 0; c < 3; ++c) out << "," << (c < k ? Y(p, c) : 0.0);
    out << "\n";
  }
}

void write_field_csv(const PeriodicField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot write");
  out << std::setprecision(17);
  for (int i = 0; i < f.grid.n(); ++i) out << (i ? "," : "") << "x" << i + 1;
  for (int c = 0; c < f.comps; ++c) out << ",c" << c;
  out << "\n";
  for (std::size_t p = 0; p < f.size(); ++p) {
    Vec x = f.grid.point(p);
    for (int i = 0; i < f.grid.n(); ++i) out << (i ? "," : "") << x(i);
    for (int c = 0; c < f.comps; ++c) out << "," << f.at(c, p);
    out << "\n";
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot write");
  out << j.dump(2) << "\n";
}

}  // namespace isoembed
