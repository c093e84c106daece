#include "rydsim/ising.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rydsim/error.hpp"

namespace rydsim {

namespace {

void check_symmetric_zero_diag(const Eigen::MatrixXd& m, int n,
                               const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw SchemaError(std::string(what) + ": expected " + std::to_string(n) +
                      "x" + std::to_string(n) + " matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) {
      throw SchemaError(std::string(what) + ": nonzero diagonal at (" +
                        std::to_string(i) + "," + std::to_string(i) + ")");
    }
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        throw SchemaError(std::string(what) + ": not symmetric at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

void QuboInstance::validate() const {
  if (n < 1) throw SchemaError("QuboInstance: n must be >= 1");
  if (linear_khz.size() != n) {
    throw SchemaError("QuboInstance: linear term size != n");
  }
  check_symmetric_zero_diag(quadratic_khz, n, "QuboInstance quadratic term");
}

double QuboInstance::evaluate(uint32_t assignment) const {
  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    if (((assignment >> i) & 1u) == 0) continue;
    f += linear_khz(i);
    for (int j = i + 1; j < n; ++j) {
      if ((assignment >> j) & 1u) {
        f += 0.5 * (quadratic_khz(i, j) + quadratic_khz(j, i));
      }
    }
  }
  return f;
}

void IsingProblem::validate() const {
  if (n < 1) throw SchemaError("IsingProblem: n must be >= 1");
  if (h_tilde_khz.size() != n) {
    throw SchemaError("IsingProblem: bias vector size != n");
  }
  check_symmetric_zero_diag(j_tilde_khz, n, "IsingProblem coupling matrix");
}

double IsingProblem::energy(uint32_t basis_index) const {
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double si = ((basis_index >> i) & 1u) ? -1.0 : 1.0;
    e += h_tilde_khz(i) * si;
    for (int j = i + 1; j < n; ++j) {
      const double sj = ((basis_index >> j) & 1u) ? -1.0 : 1.0;
      e += j_tilde_khz(i, j) * si * sj;
    }
  }
  return e;
}

std::vector<std::pair<int, int>> IsingProblem::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j_tilde_khz(i, j) != 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

nlohmann::json IsingProblem::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["linear_khz"] = std::vector<double>(h_tilde_khz.data(),
                                        h_tilde_khz.data() + n);
  std::vector<std::vector<double>> quad(n, std::vector<double>(n, 0.0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) quad[r][c] = j_tilde_khz(r, c);
  }
  j["quadratic_khz"] = quad;
  j["energy_offset_khz"] = energy_offset_khz;
  j["convention"] = "spin_up_is_plus_one";
  return j;
}

IsingProblem IsingProblem::from_json(const nlohmann::json& j) {
  if (!j.contains("convention")) {
    throw SchemaError("problem: missing mandatory \"convention\" tag",
                      "/problem/convention");
  }
  if (j.at("convention").get<std::string>() != "spin_up_is_plus_one") {
    throw SchemaError("problem: unsupported convention \"" +
                          j.at("convention").get<std::string>() +
                          "\" (expected \"spin_up_is_plus_one\")",
                      "/problem/convention");
  }
  IsingProblem p;
  p.n = j.at("n").get<int>();
  const auto lin = j.at("linear_khz").get<std::vector<double>>();
  if (static_cast<int>(lin.size()) != p.n) {
    throw SchemaError("problem: linear_khz length != n", "/problem/linear_khz");
  }
  p.h_tilde_khz = Eigen::Map<const Eigen::VectorXd>(lin.data(), p.n);
  const auto quad = j.at("quadratic_khz").get<std::vector<std::vector<double>>>();
  p.j_tilde_khz = Eigen::MatrixXd::Zero(p.n, p.n);
  if (static_cast<int>(quad.size()) != p.n) {
    throw SchemaError("problem: quadratic_khz must be n rows",
                      "/problem/quadratic_khz");
  }
  for (int r = 0; r < p.n; ++r) {
    if (static_cast<int>(quad[r].size()) != p.n) {
      throw SchemaError("problem: quadratic_khz row " + std::to_string(r) +
                            " must have n columns",
                        "/problem/quadratic_khz");
    }
    for (int c = 0; c < p.n; ++c) p.j_tilde_khz(r, c) = quad[r][c];
  }
  p.energy_offset_khz = j.value("energy_offset_khz", 0.0);
  p.validate();
  return p;
}

std::string SpinConfiguration::to_string() const {
  std::string s(static_cast<size_t>(n), '0');
  for (int i = 0; i < n; ++i) s[static_cast<size_t>(i)] = bit(i) ? '1' : '0';
  return s;
}

IsingProblem qubo_to_ising(const QuboInstance& q) {
  q.validate();
  IsingProblem p;
  p.n = q.n;
  p.j_tilde_khz = 0.25 * 0.5 * (q.quadratic_khz + q.quadratic_khz.transpose());
  p.h_tilde_khz = 0.5 * q.linear_khz;
  double offset = 0.5 * q.linear_khz.sum();
  for (int i = 0; i < q.n; ++i) {
    for (int j = i + 1; j < q.n; ++j) {
      p.h_tilde_khz(i) += p.j_tilde_khz(i, j);
      p.h_tilde_khz(j) += p.j_tilde_khz(i, j);
      offset += p.j_tilde_khz(i, j);
    }
  }
  p.energy_offset_khz = offset;
  return p;
}

IsingProblem benchmark_chain(int n, double j_nn_khz, double delta_e_total_khz) {
  if (n < 2) throw DomainError("benchmark_chain: n must be >= 2");
  if (j_nn_khz <= 0.0 || delta_e_total_khz <= 0.0) {
    throw DomainError("benchmark_chain: J and deltaE_total must be positive");
  }
  // Precondition n * deltaE < J with deltaE = deltaE_total / n, i.e. the
  // site-energy span must stay below the coupling.
  if (delta_e_total_khz >= j_nn_khz) {
    throw DomainError(
        "benchmark_chain: requires n * deltaE < J (deltaE = deltaE_total / n); "
        "got deltaE_total = " + std::to_string(delta_e_total_khz) +
        " kHz >= J = " + std::to_string(j_nn_khz) + " kHz");
  }
  QuboInstance q;
  q.n = n;
  q.linear_khz = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    q.linear_khz(i) = -static_cast<double>(i + 1) / n * delta_e_total_khz;
  }
  q.quadratic_khz = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    q.quadratic_khz(i, i + 1) = j_nn_khz;
    q.quadratic_khz(i + 1, i) = j_nn_khz;
  }
  return qubo_to_ising(q);
}

namespace {

// Lexicographic order of the rendered bitstring (qubit 0 is the leftmost
// character, so this is *not* numeric order on the index).
bool bitstring_less(uint32_t a, uint32_t b, int n) {
  for (int i = 0; i < n; ++i) {
    const uint32_t ba = (a >> i) & 1u;
    const uint32_t bb = (b >> i) & 1u;
    if (ba != bb) return ba < bb;
  }
  return false;
}

}  // namespace

GroundStateResult brute_force_ground(const IsingProblem& p,
                                     int enumeration_cap) {
  p.validate();
  if (p.n > enumeration_cap) {
    throw DomainError("brute_force_ground: n = " + std::to_string(p.n) +
                      " exceeds enumeration cap " +
                      std::to_string(enumeration_cap));
  }
  const uint32_t dim = 1u << p.n;
  uint32_t best = 0;
  double e_min = p.energy(0);
  // First pass: minimum energy with bitstring tie-breaking.
  for (uint32_t k = 1; k < dim; ++k) {
    const double e = p.energy(k);
    if (e < e_min || (e == e_min && bitstring_less(k, best, p.n))) {
      e_min = e;
      best = k;
    }
  }
  // Second pass: degeneracy and the second-lowest distinct energy.
  int degeneracy = 0;
  double e_second = std::numeric_limits<double>::infinity();
  for (uint32_t k = 0; k < dim; ++k) {
    const double e = p.energy(k);
    if (e == e_min) {
      ++degeneracy;
    } else if (e < e_second) {
      e_second = e;
    }
  }
  GroundStateResult r;
  r.configuration = SpinConfiguration{best, p.n};
  r.energy_khz = e_min;
  r.gap_khz = std::isfinite(e_second) ? e_second - e_min : 0.0;
  r.degeneracy = degeneracy;
  return r;
}

DressingAssignment sign_mask_for_couplings(const IsingProblem& p) {
  p.validate();
  // Physical J < 0.  An edge with J~ < 0 (ferromagnetic, same sign as the
  // physical coupling) must dress equal pair states; J~ > 0 requires the
  // sign flip from dressing unequal states.  Equal <=> same atom level, so
  // this is a two-coloring with per-edge parity constraints.
  const int n = p.n;
  std::vector<int> level(static_cast<size_t>(n), -1);
  std::vector<std::pair<int, int>> frustrated;
  const auto edge_list = p.edges();
  for (int root = 0; root < n; ++root) {
    if (level[static_cast<size_t>(root)] != -1) continue;
    level[static_cast<size_t>(root)] = 0;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        const double jt = p.j_tilde_khz(u, v);
        if (v == u || jt == 0.0) continue;
        const int parity = jt > 0.0 ? 1 : 0;  // 1: unequal levels required
        const int want = level[static_cast<size_t>(u)] ^ parity;
        if (level[static_cast<size_t>(v)] == -1) {
          level[static_cast<size_t>(v)] = want;
          stack.push_back(v);
        } else if (level[static_cast<size_t>(v)] != want) {
          frustrated.emplace_back(std::min(u, v), std::max(u, v));
        }
      }
    }
  }
  if (!frustrated.empty()) {
    std::sort(frustrated.begin(), frustrated.end());
    frustrated.erase(std::unique(frustrated.begin(), frustrated.end()),
                     frustrated.end());
    std::ostringstream msg;
    msg << "sign_mask_for_couplings: no consistent dressing assignment; "
           "frustrated edges:";
    for (const auto& [a, b] : frustrated) msg << " (" << a << "," << b << ")";
    throw DomainError(msg.str());
  }
  DressingAssignment out;
  out.atom_level = level;
  for (const auto& [i, j] : edge_list) {
    if (level[static_cast<size_t>(i)] == level[static_cast<size_t>(j)]) {
      out.equal_edges.emplace_back(i, j);
    } else {
      out.unequal_edges.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace rydsim
