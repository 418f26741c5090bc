// SPDX-License-Identifier: Apache-2.0
#include "rssqp/suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "json.hpp"

namespace rssqp {

namespace {

struct ScalarFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  bool nonlinear = true;
};

struct SourceProblem {
  std::string id;
  int n = 0;
  std::vector<ScalarFunction> eq;
  std::vector<ScalarFunction> ineq;  // c(x) <= 0
  Vector weights;
  VectorFunction components;
  double constant = 0.0;
  Vector x0;
  Vector solution;
  double optimal_value = 0.0;
  std::string provenance;
};

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

ScalarFunction linear(Vector a, double b) {
  // a'x + b
  return {[a, b](const Vector& x) { return a.dot(x) + b; }, [a](const Vector&) { return a; }, false};
}

// lo <= x_i <= hi as linear inequalities, lower then upper, in index order.
void add_bounds(SourceProblem& p, const std::vector<std::pair<double, double>>& bounds) {
  for (int i = 0; i < p.n; ++i) {
    const auto [lo, hi] = bounds[i];
    if (std::isfinite(lo)) {
      Vector a = Vector::Zero(p.n);
      a[i] = -1.0;
      p.ineq.push_back(linear(a, lo));
    }
    if (std::isfinite(hi)) {
      Vector a = Vector::Zero(p.n);
      a[i] = 1.0;
      p.ineq.push_back(linear(a, -hi));
    }
  }
}

constexpr double kNoBound = std::numeric_limits<double>::infinity();

SourceProblem hs06() {
  SourceProblem p;
  p.id = "HS06";
  p.n = 2;
  p.weights = vec({1.0});
  p.components = {[](const Vector& x) { return vec({1.0 - x[0]}); },
                  [](const Vector&) {
                    Matrix G(2, 1);
                    G << -1.0, 0.0;
                    return G;
                  }};
  p.eq.push_back({[](const Vector& x) { return 10.0 * (x[1] - x[0] * x[0]); },
                  [](const Vector& x) { return vec({-20.0 * x[0], 10.0}); }});
  p.x0 = vec({-1.2, 1.0});
  p.solution = vec({1.0, 1.0});
  p.optimal_value = 0.0;
  p.provenance = "Hock-Schittkowski No. 6";
  return p;
}

SourceProblem hs11() {
  SourceProblem p;
  p.id = "HS11";
  p.n = 2;
  p.weights = vec({1.0, 1.0});
  p.constant = -25.0;
  p.components = {[](const Vector& x) { return vec({x[0] - 5.0, x[1]}); },
                  [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); }};
  p.ineq.push_back({[](const Vector& x) { return x[0] * x[0] - x[1]; },
                    [](const Vector& x) { return vec({2.0 * x[0], -1.0}); }});
  p.x0 = vec({4.9, 0.1});
  p.solution = vec({1.2347728250532969804, 1.5246639294900999511});
  p.optimal_value = -8.4984642231546773775;
  p.provenance = "Hock-Schittkowski No. 11; x* refined by Newton on the KKT system";
  return p;
}

SourceProblem hs14() {
  SourceProblem p;
  p.id = "HS14";
  p.n = 2;
  p.weights = vec({1.0, 1.0});
  p.components = {[](const Vector& x) { return vec({x[0] - 2.0, x[1] - 1.0}); },
                  [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); }};
  p.eq.push_back(linear(vec({1.0, -2.0}), 1.0));
  p.ineq.push_back({[](const Vector& x) { return 0.25 * x[0] * x[0] + x[1] * x[1] - 1.0; },
                    [](const Vector& x) { return vec({0.5 * x[0], 2.0 * x[1]}); }});
  p.x0 = vec({2.0, 2.0});
  p.solution = vec({0.82287565553229529525, 0.91143782776614764763});
  p.optimal_value = 1.3934649806893020523;
  p.provenance = "Hock-Schittkowski No. 14; x* = ((sqrt7-1)/2, (sqrt7+1)/4)";
  return p;
}

SourceProblem hs20() {
  SourceProblem p;
  p.id = "HS20";
  p.n = 2;
  p.weights = vec({100.0, 1.0});
  p.components = {[](const Vector& x) { return vec({x[1] - x[0] * x[0], 1.0 - x[0]}); },
                  [](const Vector& x) {
                    Matrix G(2, 2);
                    G << -2.0 * x[0], -1.0, 1.0, 0.0;
                    return G;
                  }};
  p.ineq.push_back({[](const Vector& x) { return -(x[1] + x[0] * x[0]); },
                    [](const Vector& x) { return vec({-2.0 * x[0], -1.0}); }});
  p.ineq.push_back({[](const Vector& x) { return -(x[0] + x[1] * x[1]); },
                    [](const Vector& x) { return vec({-1.0, -2.0 * x[1]}); }});
  p.ineq.push_back({[](const Vector& x) { return 1.0 - x[0] * x[0] - x[1] * x[1]; },
                    [](const Vector& x) { return vec({-2.0 * x[0], -2.0 * x[1]}); }});
  add_bounds(p, {{-0.5, 0.5}, {-kNoBound, kNoBound}});
  p.x0 = vec({-2.0, 1.0});
  p.solution = vec({0.5, 0.86602540378443864676});
  p.optimal_value = 38.198729810778067662;
  p.provenance = "Hock-Schittkowski No. 20; x* = (1/2, sqrt3/2)";
  return p;
}

SourceProblem hs30() {
  SourceProblem p;
  p.id = "HS30";
  p.n = 3;
  p.weights = vec({1.0, 1.0, 1.0});
  p.components = {[](const Vector& x) { return Vector(x); },
                  [](const Vector&) { return Matrix(Matrix::Identity(3, 3)); }};
  p.ineq.push_back({[](const Vector& x) { return 1.0 - x[0] * x[0] - x[1] * x[1]; },
                    [](const Vector& x) { return vec({-2.0 * x[0], -2.0 * x[1], 0.0}); }});
  add_bounds(p, {{1.0, 10.0}, {-10.0, 10.0}, {-10.0, 10.0}});
  p.x0 = vec({1.0, 1.0, 1.0});
  p.solution = vec({1.0, 0.0, 0.0});
  p.optimal_value = 1.0;
  p.provenance = "Hock-Schittkowski No. 30";
  return p;
}

SourceProblem hs31() {
  SourceProblem p;
  p.id = "HS31";
  p.n = 3;
  p.weights = vec({9.0, 1.0, 9.0});
  p.components = {[](const Vector& x) { return Vector(x); },
                  [](const Vector&) { return Matrix(Matrix::Identity(3, 3)); }};
  p.ineq.push_back({[](const Vector& x) { return 1.0 - x[0] * x[1]; },
                    [](const Vector& x) { return vec({-x[1], -x[0], 0.0}); }});
  add_bounds(p, {{-10.0, 10.0}, {1.0, 10.0}, {-10.0, 1.0}});
  p.x0 = vec({1.0, 1.0, 1.0});
  p.solution = vec({0.57735026918962576451, 1.7320508075688772935, 0.0});
  p.optimal_value = 6.0;
  p.provenance = "Hock-Schittkowski No. 31; x* = (1/sqrt3, sqrt3, 0)";
  return p;
}

SourceProblem hs32() {
  SourceProblem p;
  p.id = "HS32";
  p.n = 3;
  p.weights = vec({1.0, 4.0});
  p.components = {[](const Vector& x) { return vec({x[0] + 3.0 * x[1] + x[2], x[0] - x[1]}); },
                  [](const Vector&) {
                    Matrix G(3, 2);
                    G << 1.0, 1.0, 3.0, -1.0, 1.0, 0.0;
                    return G;
                  }};
  p.eq.push_back(linear(vec({-1.0, -1.0, -1.0}), 1.0));
  p.ineq.push_back(
      {[](const Vector& x) { return -(6.0 * x[1] + 4.0 * x[2] - x[0] * x[0] * x[0] - 3.0); },
       [](const Vector& x) { return vec({3.0 * x[0] * x[0], -6.0, -4.0}); }});
  add_bounds(p, {{0.0, kNoBound}, {0.0, kNoBound}, {0.0, kNoBound}});
  p.x0 = vec({0.1, 0.7, 0.2});
  p.solution = vec({0.0, 0.0, 1.0});
  p.optimal_value = 1.0;
  p.provenance = "Hock-Schittkowski No. 32";
  return p;
}

SourceProblem hs46() {
  SourceProblem p;
  p.id = "HS46";
  p.n = 5;
  p.weights = vec({1.0, 1.0, 1.0, 1.0});
  p.components = {[](const Vector& x) {
                    return vec({x[0] - x[1], x[2] - 1.0, std::pow(x[3] - 1.0, 2),
                                std::pow(x[4] - 1.0, 3)});
                  },
                  [](const Vector& x) {
                    Matrix G = Matrix::Zero(5, 4);
                    G(0, 0) = 1.0;
                    G(1, 0) = -1.0;
                    G(2, 1) = 1.0;
                    G(3, 2) = 2.0 * (x[3] - 1.0);
                    G(4, 3) = 3.0 * std::pow(x[4] - 1.0, 2);
                    return G;
                  }};
  p.eq.push_back({[](const Vector& x) { return x[0] * x[0] * x[3] + std::sin(x[3] - x[4]) - 1.0; },
                  [](const Vector& x) {
                    const double cs = std::cos(x[3] - x[4]);
                    return vec({2.0 * x[0] * x[3], 0.0, 0.0, x[0] * x[0] + cs, -cs});
                  }});
  p.eq.push_back({[](const Vector& x) { return x[1] + std::pow(x[2], 4) * x[3] * x[3] - 2.0; },
                  [](const Vector& x) {
                    return vec({0.0, 1.0, 4.0 * std::pow(x[2], 3) * x[3] * x[3],
                                2.0 * std::pow(x[2], 4) * x[3], 0.0});
                  }});
  p.x0 = vec({0.5 * std::numbers::sqrt2, 1.75, 0.5, 2.0, 2.0});
  p.solution = vec({1.0, 1.0, 1.0, 1.0, 1.0});
  p.optimal_value = 0.0;
  p.provenance = "Hock-Schittkowski No. 46";
  return p;
}

SourceProblem hs60() {
  SourceProblem p;
  p.id = "HS60";
  p.n = 3;
  p.weights = vec({1.0, 1.0, 1.0});
  p.components = {[](const Vector& x) {
                    return vec({x[0] - 1.0, x[0] - x[1], std::pow(x[1] - x[2], 2)});
                  },
                  [](const Vector& x) {
                    Matrix G = Matrix::Zero(3, 3);
                    G(0, 0) = 1.0;
                    G(0, 1) = 1.0;
                    G(1, 1) = -1.0;
                    G(1, 2) = 2.0 * (x[1] - x[2]);
                    G(2, 2) = -2.0 * (x[1] - x[2]);
                    return G;
                  }};
  p.eq.push_back({[](const Vector& x) {
                    return x[0] * (1.0 + x[1] * x[1]) + std::pow(x[2], 4) - 4.0 -
                           3.0 * std::numbers::sqrt2;
                  },
                  [](const Vector& x) {
                    return vec({1.0 + x[1] * x[1], 2.0 * x[0] * x[1], 4.0 * std::pow(x[2], 3)});
                  }});
  add_bounds(p, {{-10.0, 10.0}, {-10.0, 10.0}, {-10.0, 10.0}});
  p.x0 = vec({2.0, 2.0, 2.0});
  p.solution = vec({1.1048590197333165479, 1.1966741822882571365, 1.5352622603253261025});
  p.optimal_value = 0.032568200255069838789;
  p.provenance = "Hock-Schittkowski No. 60; x* refined by Newton on the KKT system";
  return p;
}

SourceProblem hs63() {
  SourceProblem p;
  p.id = "HS63";
  p.n = 3;
  // 1000 - x1^2 - 2 x2^2 - x3^2 - x1 x2 - x1 x3
  //   = 1000 - (x1+x2)^2/2 - (x1+x3)^2/2 - 3 x2^2 / 2 - x3^2 / 2
  p.weights = vec({-0.5, -0.5, -1.5, -0.5});
  p.constant = 1000.0;
  p.components = {[](const Vector& x) { return vec({x[0] + x[1], x[0] + x[2], x[1], x[2]}); },
                  [](const Vector&) {
                    Matrix G(3, 4);
                    G << 1.0, 1.0, 0.0, 0.0,  //
                        1.0, 0.0, 1.0, 0.0,   //
                        0.0, 1.0, 0.0, 1.0;
                    return G;
                  }};
  p.eq.push_back(linear(vec({8.0, 14.0, 7.0}), -56.0));
  p.eq.push_back({[](const Vector& x) { return x.squaredNorm() - 25.0; },
                  [](const Vector& x) { return Vector(2.0 * x); }});
  add_bounds(p, {{0.0, kNoBound}, {0.0, kNoBound}, {0.0, kNoBound}});
  p.x0 = vec({2.0, 2.0, 2.0});
  p.solution = vec({3.5121213418747198662, 0.21698794151522302820, 3.5521711548270169536});
  p.optimal_value = 961.71517213005217173;
  p.provenance = "Hock-Schittkowski No. 63; x* refined by Newton on the KKT system";
  return p;
}

SourceProblem s216() {
  SourceProblem p;
  p.id = "S216";
  p.n = 2;
  p.weights = vec({100.0, 1.0});
  p.components = {[](const Vector& x) { return vec({x[0] * x[0] - x[1], x[0] - 1.0}); },
                  [](const Vector& x) {
                    Matrix G(2, 2);
                    G << 2.0 * x[0], 1.0, -1.0, 0.0;
                    return G;
                  }};
  p.eq.push_back({[](const Vector& x) { return x[0] * (x[0] - 4.0) - 2.0 * x[1] + 12.0; },
                  [](const Vector& x) { return vec({2.0 * x[0] - 4.0, -2.0}); }});
  p.x0 = vec({-1.2, 1.0});
  p.solution = vec({2.0, 4.0});
  p.optimal_value = 1.0;
  p.provenance = "Schittkowski No. 216 (bounds not used)";
  return p;
}

SourceProblem s316() {
  SourceProblem p;
  p.id = "S316";
  p.n = 2;
  p.weights = vec({1.0, 1.0});
  p.components = {[](const Vector& x) { return vec({x[0] - 20.0, x[1] + 20.0}); },
                  [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); }};
  p.eq.push_back({[](const Vector& x) { return 0.01 * x[0] * x[0] + 0.01 * x[1] * x[1] - 1.0; },
                  [](const Vector& x) { return vec({0.02 * x[0], 0.02 * x[1]}); }});
  p.x0 = vec({0.0, 0.0});
  p.solution = vec({5.0 * std::numbers::sqrt2, -5.0 * std::numbers::sqrt2});
  p.optimal_value = 334.31457505076198048;
  p.provenance = "Schittkowski No. 316; x* = (5 sqrt2, -5 sqrt2)";
  return p;
}

using Factory = SourceProblem (*)();

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> r = {
      {"HS06", hs06}, {"HS11", hs11}, {"HS14", hs14}, {"HS20", hs20},
      {"HS30", hs30}, {"HS31", hs31}, {"HS32", hs32}, {"HS46", hs46},
      {"HS60", hs60}, {"HS63", hs63}, {"S216", s216}, {"S316", s316},
  };
  return r;
}

SourceProblem load_source(const std::string& id) {
  for (const auto& [name, make] : registry()) {
    if (name == id) return make();
  }
  std::string ids;
  for (const auto& entry : registry()) ids += (ids.empty() ? "" : ", ") + entry.first;
  throw InvalidArgument("problem '" + id + "' is not implemented; available: " + ids);
}

ScalarFunction shifted(const ScalarFunction& f, int n, double vertical, bool horizontal) {
  const Vector e = horizontal ? Vector::Ones(n) : Vector::Zero(n);
  return {[f, e, vertical](const Vector& x) { return f.value(x - e) - vertical; },
          [f, e](const Vector& x) { return f.gradient(x - e); }, f.nonlinear};
}

VectorFunction stack(std::vector<ScalarFunction> fns, int n) {
  const auto m = static_cast<Eigen::Index>(fns.size());
  return {[fns, m](const Vector& x) {
            Vector v(m);
            for (Eigen::Index i = 0; i < m; ++i) v[i] = fns[i].value(x);
            return v;
          },
          [fns, m, n](const Vector& x) {
            Matrix G(n, m);
            for (Eigen::Index i = 0; i < m; ++i) G.col(i) = fns[i].gradient(x);
            return G;
          }};
}

struct Adapted {
  SourceProblem src;
  AdaptedProblemSpec spec;
};

Adapted adapt(const std::string& id, double sigma) {
  Adapted a{load_source(id), {}};
  SourceProblem& p = a.src;
  AdaptedProblemSpec& spec = a.spec;
  spec.source_id = id;
  spec.sigma = sigma;
  spec.optimal_value = p.optimal_value;
  spec.provenance = p.provenance;
  const Vector& xs = p.solution;
  const Vector e = Vector::Ones(p.n);

  if (!p.eq.empty() && p.ineq.empty()) {
    const int last = static_cast<int>(p.eq.size()) - 1;
    const double b = p.eq[last].value(xs - e);
    p.ineq.push_back(shifted(p.eq[last], p.n, b, true));
    spec.adaptation = Adaptation::AddedInequality;
    spec.derived_constant = b;
    spec.shifted_constraint = last;
  } else if (p.eq.empty() && !p.ineq.empty()) {
    int pick = -1;
    bool horizontal = true;
    for (int i = static_cast<int>(p.ineq.size()) - 1; i >= 0 && pick < 0; --i) {
      if (p.ineq[i].nonlinear && std::abs(p.ineq[i].value(xs)) <= 1e-9) pick = i;
    }
    if (pick < 0) {
      horizontal = false;
      for (int i = static_cast<int>(p.ineq.size()) - 1; i >= 0 && pick < 0; --i) {
        if (p.ineq[i].nonlinear) pick = i;
      }
      if (pick < 0) pick = static_cast<int>(p.ineq.size()) - 1;
    }
    const double shift = p.ineq[pick].value(horizontal ? Vector(xs - e) : xs);
    p.eq.push_back(shifted(p.ineq[pick], p.n, shift, horizontal));
    spec.adaptation = Adaptation::SynthesizedEquality;
    spec.derived_constant = shift;
    spec.shifted_constraint = pick;
    spec.horizontal_shift = horizontal;
  }
  spec.n = p.n;
  spec.m1 = static_cast<int>(p.eq.size());
  spec.m2 = static_cast<int>(p.ineq.size());
  return a;
}

}  // namespace

const char* to_string(Adaptation a) {
  switch (a) {
    case Adaptation::AddedInequality: return "AddedInequality";
    case Adaptation::SynthesizedEquality: return "SynthesizedEquality";
    case Adaptation::None: return "None";
  }
  return "None";
}

std::vector<std::string> list_suite() {
  std::vector<std::string> ids;
  for (const auto& entry : registry()) ids.push_back(entry.first);
  return ids;
}

AdaptedProblemSpec adapted_problem_spec(const std::string& source_id, double sigma) {
  return adapt(source_id, sigma).spec;
}

ProblemInstance build_adapted_problem(const std::string& source_id, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("build_adapted_problem: sigma must be >= 0");
  Adapted a = adapt(source_id, sigma);
  SourceProblem& src = a.src;
  ProblemInstance prob;
  prob.name = src.id;
  prob.n = src.n;
  prob.m1 = static_cast<int>(src.eq.size());
  prob.m2 = static_cast<int>(src.ineq.size());
  prob.eq = stack(src.eq, src.n);
  prob.ineq = stack(src.ineq, src.n);
  prob.weights = src.weights;
  prob.components = src.components;
  prob.objective_constant = src.constant;
  prob.sigma = sigma;
  prob.x0 = src.x0;
  prob.solutions = {src.solution};
  prob.validate();
  return prob;
}

std::optional<SolutionDistance> distance_to_solution_set(const Vector& x,
                                                         const std::vector<Vector>& sols) {
  if (sols.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : sols) best = std::min(best, (x - s).norm());
  return SolutionDistance{best, std::log10(std::max(best, kDistanceFloor))};
}

std::vector<std::string> hard_cases() { return {"HS30", "HS31", "HS46", "S316"}; }

std::string suite_manifest_json() {
  nlohmann::ordered_json root;
  root["distance_norm"] = "euclidean";
  root["distance_floor"] = kDistanceFloor;
  root["hard_cases"] = hard_cases();
  nlohmann::ordered_json problems = nlohmann::ordered_json::array();
  for (const auto& id : list_suite()) {
    const AdaptedProblemSpec spec = adapted_problem_spec(id);
    const ProblemInstance prob = build_adapted_problem(id, 0.0);
    nlohmann::ordered_json p;
    p["id"] = id;
    p["n"] = spec.n;
    p["m1"] = spec.m1;
    p["m2"] = spec.m2;
    p["adaptation"] = to_string(spec.adaptation);
    p["shifted_constraint"] = spec.shifted_constraint;
    p["horizontal_shift"] = spec.horizontal_shift;
    p["derived_constant"] = spec.derived_constant;
    p["optimal_value"] = spec.optimal_value;
    p["x0"] = std::vector<double>(prob.x0.data(), prob.x0.data() + prob.n);
    nlohmann::ordered_json sols = nlohmann::ordered_json::array();
    for (const auto& s : prob.solutions) sols.push_back(std::vector<double>(s.data(), s.data() + s.size()));
    p["solutions"] = sols;
    p["provenance"] = spec.provenance;
    problems.push_back(p);
  }
  root["problems"] = problems;
  return root.dump(2) + "\n";
}

}  // namespace rssqp
