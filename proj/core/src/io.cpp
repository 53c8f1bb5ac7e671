#include "sa_lab/io.hpp"

#include "sa_lab/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace salab::io {

namespace {

const json& field(const json& doc, const std::string& name) {
  if (!doc.is_object()) throw InvalidInput("expected a JSON object holding field '" + name + "'");
  auto it = doc.find(name);
  if (it == doc.end()) throw InvalidInput("missing field '" + name + "'");
  return *it;
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw InvalidInput("field '" + name + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& name) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw InvalidInput("field '" + name + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

Matrix matrix(const json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) throw InvalidInput("field '" + name + "' must be a nonempty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array()) throw InvalidInput("field '" + name + "' must be an array of arrays");
  const std::size_t cols = v[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string where = name + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) throw InvalidInput("field '" + where + "' has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(v[r][c], where + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw InvalidInput("field '" + name + "' must be " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

FiniteMarkovChain chain_from_json(const json& doc) {
  const std::size_t n = count(field(doc, "n"), "n");
  Matrix p = matrix(field(doc, "transition"), "transition");
  expect_shape(p, n, n, "transition");
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    const json& l = doc["labels"];
    if (!l.is_array() || l.size() != n) throw InvalidInput("field 'labels' must list one label per state");
    for (const auto& item : l) labels.push_back(item.is_string() ? item.get<std::string>() : item.dump());
  }
  try {
    return FiniteMarkovChain(std::move(p), std::move(labels));
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field 'transition': ") + e.what());
  }
}

Mdp mdp_from_json(const json& doc) {
  const std::size_t n_s = count(field(doc, "n_states"), "n_states");
  const std::size_t n_a = count(field(doc, "n_actions"), "n_actions");
  const double gamma = number(field(doc, "gamma"), "gamma");
  const json& t = field(doc, "transition");
  if (!t.is_array() || t.size() != n_a) throw InvalidInput("field 'transition' must hold one matrix per action");
  std::vector<Matrix> p;
  for (std::size_t a = 0; a < n_a; ++a) {
    const std::string name = "transition[" + std::to_string(a) + "]";
    p.push_back(matrix(t[a], name));
    expect_shape(p.back(), n_s, n_s, name);
  }
  Matrix r = matrix(field(doc, "reward"), "reward");
  expect_shape(r, n_s, n_a, "reward");
  std::optional<double> r_max;
  if (doc.contains("r_max")) r_max = number(doc["r_max"], "r_max");
  return Mdp(std::move(p), std::move(r), gamma, r_max);
}

LinearFeatures features_from_json(const json& doc, std::size_t n_states, std::size_t n_actions) {
  const std::size_t d = count(field(doc, "d"), "d");
  Matrix phi = matrix(field(doc, "phi"), "phi");
  expect_shape(phi, n_states * n_actions, d, "phi");
  return LinearFeatures(std::move(phi), n_states, n_actions);
}

LinearFeatures features_from_csv(const std::string& text, std::size_t n_states, std::size_t n_actions) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidInput("features csv: row " + std::to_string(rows.size()) + " has a non-numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidInput("features csv: row " + std::to_string(rows.size()) + " has the wrong length");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("features csv: no rows");
  Matrix phi(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) phi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  expect_shape(phi, n_states * n_actions, static_cast<std::size_t>(phi.cols()), "phi");
  return LinearFeatures(std::move(phi), n_states, n_actions);
}

LinearFeatures load_features(const std::filesystem::path& path, std::size_t n_states, std::size_t n_actions) {
  if (path.extension() == ".csv") return features_from_csv(read_text(path), n_states, n_actions);
  return features_from_json(read_json(path), n_states, n_actions);
}

Policy policy_from_json(const json& doc, std::size_t n_states, std::size_t n_actions) {
  if (doc.is_string()) {
    if (doc.get<std::string>() == "uniform") return Policy::uniform(n_states, n_actions);
    throw InvalidInput("policy: unknown policy name '" + doc.get<std::string>() + "'");
  }
  Matrix probs = matrix(field(doc, "probs"), "probs");
  expect_shape(probs, n_states, n_actions, "probs");
  return Policy(std::move(probs));
}

Policy load_policy(const std::string& spec, std::size_t n_states, std::size_t n_actions) {
  if (spec == "uniform") return Policy::uniform(n_states, n_actions);
  return policy_from_json(read_json(spec), n_states, n_actions);
}

Vector vector_from_json(const json& doc, const std::string& name) {
  if (!doc.is_array()) throw InvalidInput("field '" + name + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(doc[i], name + "[" + std::to_string(i) + "]");
  return v;
}

SaProblem linear_problem_from_json(const json& doc) {
  FiniteMarkovChain chain = chain_from_json(field(doc, "chain"));
  Vector theta_star = vector_from_json(field(doc, "theta_star"), "theta_star");
  const auto d = static_cast<std::size_t>(theta_star.size());
  const json& a = field(doc, "A");
  const json& b = field(doc, "b");
  if (!a.is_array() || a.size() != chain.size()) throw InvalidInput("field 'A' must hold one matrix per chain state");
  if (!b.is_array() || b.size() != chain.size()) throw InvalidInput("field 'b' must hold one vector per chain state");
  std::vector<Matrix> as;
  std::vector<Vector> bs;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const std::string an = "A[" + std::to_string(x) + "]";
    as.push_back(matrix(a[x], an));
    expect_shape(as.back(), d, d, an);
    bs.push_back(vector_from_json(b[x], "b[" + std::to_string(x) + "]"));
    if (static_cast<std::size_t>(bs.back().size()) != d) throw InvalidInput("field 'b[" + std::to_string(x) + "]' has the wrong length");
  }
  return make_linear_problem(chain, std::move(as), std::move(bs), std::move(theta_star));
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const StabilityReport& r) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  json out;
  out["gamma"] = r.gamma;
  out["delta_pi"] = r.delta_pi;
  out["gamma_threshold"] = r.gamma_threshold;
  out["kappa"] = r.kappa;
  out["h_plus"] = opt(r.h_plus);
  out["h_minus"] = opt(r.h_minus);
  out["r_pi"] = opt(r.r_pi);
  out["gas_verdict"] = r.gas_verdict ? json(to_string(*r.gas_verdict)) : json(nullptr);
  out["full_dim_infeasible"] = opt(r.full_dim_infeasible);
  out["full_dim_reason"] = r.full_dim_reason;
  out["delta_exhaustive"] = r.delta_exhaustive;
  out["minimizing_policy"] = r.minimizing_policy;
  out["certified"] = r.certified();
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

std::string curve_csv(const MseCurve& curve) {
  std::vector<std::vector<double>> rows;
  rows.reserve(curve.points.size());
  for (const auto& p : curve.points) rows.push_back({static_cast<double>(p.k), p.mean, p.std_error});
  return csv({"k", "value", "stderr"}, rows);
}

}  // namespace salab::io
