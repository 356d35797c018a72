#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "flab/algebra.hpp"
#include "flab/lattice.hpp"
#include "flab/states.hpp"
#include "flab/fluctuations.hpp"

namespace flab::io {

using Json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& msg) { fail(ErrorKind::config, msg); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) config_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double parse_real(const Json& j, const char* what) {
  if (!j.is_number()) config_error(std::string(what) + " must be a number");
  return j.get<double>();
}

/// A number, or a two-element [re, im] array.
inline Complex parse_complex(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  config_error("complex entries must be numbers or [re, im] pairs");
}

inline Matrix parse_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) config_error("matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) config_error("matrix rows must be nonempty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) config_error("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

inline Vector parse_vector(const Json& j) {
  if (!j.is_array() || j.empty()) config_error("vector must be a nonempty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(j[i]);
  return v;
}

inline Eigen::MatrixXd parse_real_matrix(const Json& j) {
  const Matrix m = parse_matrix(j);
  if (m.imag().cwiseAbs().maxCoeff() != 0.0) config_error("expected a real matrix");
  return m.real();
}

/// Pauli names I, X, Y, Z or an inline matrix.
inline SiteOperator parse_operator(const Json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "I") return pauli::id();
    if (name == "X") return pauli::x();
    if (name == "Y") return pauli::y();
    if (name == "Z") return pauli::z();
    config_error("unknown operator name '" + name + "'");
  }
  return SiteOperator(parse_matrix(j));
}

inline TensorWord parse_word(const Json& j) {
  if (!j.is_array()) config_error("word must be an array of operators");
  TensorWord w;
  for (const auto& f : j) w.factors.push_back(parse_operator(f));
  if (!w.factors.empty()) (void)w.dim();
  return w;
}

inline Matrix named_gate(const std::string& name) {
  Matrix g = Matrix::Identity(4, 4);
  if (name == "identity") return g;
  if (name == "cz") {
    g(3, 3) = -1.0;
    return g;
  }
  if (name == "swap") {
    g.setZero();
    g(0, 0) = g(3, 3) = g(1, 2) = g(2, 1) = 1.0;
    return g;
  }
  if (name == "cnot") {
    g.setZero();
    g(0, 0) = g(1, 1) = g(2, 3) = g(3, 2) = 1.0;
    return g;
  }
  config_error("unknown gate name '" + name + "'");
}

inline GlobalState parse_state(const Json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  if (kind == "product") {
    if (j.contains("rho")) return GlobalState::product(SiteState(parse_matrix(j.at("rho"))));
    if (j.contains("diag")) return GlobalState::product(SiteState::from_diagonal(j.at("diag").get<std::vector<double>>()));
    if (j.contains("pure")) return GlobalState::product(SiteState::pure(parse_vector(j.at("pure"))));
    config_error("product state needs one of 'rho', 'diag', 'pure'");
  }
  if (kind == "markov") {
    std::optional<Eigen::VectorXd> pi;
    if (j.contains("pi")) pi = Eigen::Map<const Eigen::VectorXd>(j.at("pi").get<std::vector<double>>().data(),
                                                                static_cast<Eigen::Index>(j.at("pi").size()));
    return GlobalState::markov(parse_real_matrix(field(j, "T")), parse_real(field(j, "alpha"), "alpha"), pi);
  }
  if (kind == "circuit") {
    const Json& length = field(j, "length");
    if (!length.is_number_integer() || length.get<long long>() < 1) config_error("circuit length must be a positive integer");
    std::vector<Matrix> layers;
    for (const auto& g : field(j, "layers")) layers.push_back(g.is_string() ? named_gate(g.get<std::string>()) : parse_matrix(g));
    return GlobalState::circuit(parse_vector(field(j, "base")), length.get<std::size_t>(), std::move(layers));
  }
  config_error("unknown state kind '" + kind + "'");
}

/// Optional metric override; defaults to the state's own metric.
inline Metric parse_metric(const Json& j, const GlobalState& state) {
  if (j.is_null()) return state.metric();
  const auto kind = field(j, "kind").get<std::string>();
  const double scale = j.contains("scale") ? parse_real(j.at("scale"), "scale") : 1.0;
  if (kind == "chain") return Metric::chain(scale);
  if (kind == "grid2d") return Metric::grid2d(field(j, "width").get<std::int64_t>(), scale);
  if (kind == "explicit") {
    return Metric::explicit_table(field(j, "sites").get<std::vector<SiteId>>(),
                                  field(j, "distances").get<std::vector<std::vector<double>>>());
  }
  config_error("unknown metric kind '" + kind + "'");
}

/// Regions of the requested sizes: the first |X| support points of an
/// explicit metric, otherwise the segment {0, ..., |X|-1}.
inline Region region_of_size(std::size_t size, const Metric& metric) {
  if (metric.kind() == MetricKind::explicit_table) {
    const auto& sup = metric.support();
    if (size > sup.size()) config_error("region size exceeds the explicit metric support");
    return Region(std::vector<SiteId>(sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(size)), metric);
  }
  return Region::segment(0, size, metric);
}

}  // namespace flab::io
