#include "negimag/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "negimag/errors.hpp"

namespace negimag {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

void require_spd(const Matrix& m, const char* what) {
  require_square(m.rows(), m.cols(), what);
  if (m.rows() == 0) throw DimensionError(std::string(what) + " is empty");
  if ((m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
    throw InvalidArgument(std::string(what) + " must be symmetric");
  }
  if (!(lambda_min(m) > 0.0)) throw InvalidArgument(std::string(what) + " must be positive definite");
}

void validate(const SecondOrderTerm& t) {
  require_positive(t.k, "gain k");
  require_positive(t.zeta, "damping ratio zeta");
  require_positive(t.omega, "frequency omega");
}

// Companion section with transfer (c0 + c1 s) / (s^2 + 2 zeta omega s + omega^2).
StateSpace section(double zeta, double omega, double c0, double c1, double d) {
  Matrix a(2, 2);
  a << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;
  Matrix b(2, 1);
  b << 0.0, 1.0;
  Matrix c(1, 2);
  c << c0, c1;
  return StateSpace(a, b, c, Matrix::Constant(1, 1, d));
}

template <typename Build>
StateSpace sum_terms(std::size_t count, Build build) {
  if (count == 0) throw InvalidArgument("controller needs at least one term");
  StateSpace total = build(0);
  for (std::size_t i = 1; i < count; ++i) total = add(total, build(i));
  return total;
}

// Rank-one MIMO section v v^T (c0 + c1 s) / den + d v v^T.
StateSpace vector_section(const ResonantVectorTerm& t, double c0, double c1, double d) {
  const Index m = t.v.size();
  if (m == 0) throw DimensionError("resonant vector is empty");
  require_finite(Matrix(t.v), "resonant vector");
  const StateSpace s = section(t.zeta, t.omega, c0, c1, 0.0);
  return StateSpace(s.A(), s.B() * t.v.transpose(), t.v * s.C(), d * t.v * t.v.transpose());
}

void validate(const ResonantVectorTerm& t) {
  require_positive(t.zeta, "damping ratio zeta");
  require_positive(t.omega, "frequency omega");
}

void require_same_channels(const std::vector<ResonantVectorTerm>& terms) {
  for (const auto& t : terms) {
    if (t.v.size() != terms.front().v.size()) throw DimensionError("resonant vectors differ in length");
  }
}

}  // namespace

StateSpace ppf(const std::vector<SecondOrderTerm>& terms) {
  for (const auto& t : terms) validate(t);
  return sum_terms(terms.size(), [&](std::size_t i) {
    const auto& t = terms[i];
    return section(t.zeta, t.omega, t.k, 0.0, 0.0);
  });
}

StateSpace ppf(const MimoPpfParams& p) {
  require_spd(p.D, "PPF damping matrix D");
  require_spd(p.Omega, "PPF stiffness matrix Omega");
  const Index r = p.D.rows();
  if (p.Omega.rows() != r || p.K.rows() != r || p.K.cols() == 0) {
    throw DimensionError("PPF: K must be r x m with D and Omega r x r");
  }
  require_finite(p.K, "PPF gain K");
  const Index m = p.K.cols();
  Matrix a = Matrix::Zero(2 * r, 2 * r);
  a.topRightCorner(r, r).setIdentity();
  a.bottomLeftCorner(r, r) = -p.Omega;
  a.bottomRightCorner(r, r) = -p.D;
  Matrix b = Matrix::Zero(2 * r, m);
  b.bottomRows(r) = p.K;
  Matrix c = Matrix::Zero(m, 2 * r);
  c.leftCols(r) = p.K.transpose();
  return StateSpace(a, b, c, Matrix::Zero(m, m));
}

StateSpace resonant_acc(const std::vector<SecondOrderTerm>& terms) {
  for (const auto& t : terms) validate(t);
  // -k s^2 / den = -k + k (2 zeta omega s + omega^2) / den
  return sum_terms(terms.size(), [&](std::size_t i) {
    const auto& t = terms[i];
    return section(t.zeta, t.omega, t.k * t.omega * t.omega, 2.0 * t.k * t.zeta * t.omega, -t.k);
  });
}

StateSpace resonant_acc(const std::vector<ResonantVectorTerm>& terms) {
  for (const auto& t : terms) validate(t);
  require_same_channels(terms);
  return sum_terms(terms.size(), [&](std::size_t i) {
    const auto& t = terms[i];
    return vector_section(t, t.omega * t.omega, 2.0 * t.zeta * t.omega, -1.0);
  });
}

StateSpace resonant_vel_type(const std::vector<SecondOrderTerm>& terms) {
  for (const auto& t : terms) validate(t);
  // -k s (s + 2 zeta omega) / den = -k + k omega^2 / den
  return sum_terms(terms.size(), [&](std::size_t i) {
    const auto& t = terms[i];
    return section(t.zeta, t.omega, t.k * t.omega * t.omega, 0.0, -t.k);
  });
}

StateSpace resonant_vel_type(const std::vector<ResonantVectorTerm>& terms) {
  for (const auto& t : terms) validate(t);
  require_same_channels(terms);
  return sum_terms(terms.size(), [&](std::size_t i) {
    const auto& t = terms[i];
    return vector_section(t, t.omega * t.omega, 0.0, -1.0);
  });
}

StateSpace irc(const IrcParams& p) {
  require_spd(p.Gamma, "IRC Gamma");
  require_spd(p.Phi, "IRC Phi");
  const Index m = p.Gamma.rows();
  if (p.Phi.rows() != m) throw DimensionError("IRC: Gamma and Phi must have the same size");
  return StateSpace(-p.Gamma * p.Phi, p.Gamma, Matrix::Identity(m, m), Matrix::Zero(m, m));
}

StateSpace irc(double gamma, double phi) {
  return irc(IrcParams{Matrix::Constant(1, 1, gamma), Matrix::Constant(1, 1, phi)});
}

Matrix irc_snil1_certificate(const IrcParams& p, double alpha, double eps) {
  require_spd(p.Phi, "IRC Phi");
  require_positive(alpha, "alpha");
  require_positive(eps, "eps");
  const Index m = p.Phi.rows();
  const double c = eps * (1.0 / alpha + 1.0);
  const Matrix id = Matrix::Identity(m, m);
  Matrix y(2 * m, 2 * m);
  y << inverse(p.Phi) + c * id, c * id, c * id, eps * id;
  return y;
}

Matrix choose_phi(const StateSpace& plant, double margin) {
  require_positive(margin, "margin");
  if (!plant.is_square()) throw DimensionError("choose_phi: plant must be square");
  const Matrix p0 = dc_gain(plant);
  if (p0.rows() == 1) {
    if (!(p0(0, 0) > 0.0)) throw InvalidArgument("choose_phi: plant DC gain must be positive");
  } else {
    require_spd(p0, "plant DC gain");
  }
  return margin * p0;
}

std::vector<Index> min_cost_assignment(const Matrix& cost) {
  require_square(cost.rows(), cost.cols(), "min_cost_assignment");
  // Kuhn-Munkres with row/column potentials, 1-based internally.
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(match[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index j = 1; j <= n; ++j) perm[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return perm;
}

namespace {

ComplexVector loop_poles(const StateSpace& plant, double gamma, double phi) {
  return poles(positive_feedback(plant, irc(gamma, phi)));
}

double damping(const Complex& p, DampingMeasure measure) {
  if (measure == DampingMeasure::DecayRate) return -p.real();
  return -p.real() / std::abs(p);
}

Complex upper(const Complex& p) { return p.imag() < 0.0 ? std::conj(p) : p; }

Index nearest(const ComplexVector& set, const Complex& target) {
  Index best = 0;
  for (Index i = 1; i < set.size(); ++i) {
    if (std::abs(set(i) - target) < std::abs(set(best) - target)) best = i;
  }
  return best;
}

}  // namespace

IrcDesign design_irc_gamma(const StateSpace& plant, double phi, const IrcDesignOptions& opts) {
  if (plant.num_inputs() != 1 || plant.num_outputs() != 1) {
    throw InvalidArgument("design_irc_gamma: plant must be SISO");
  }
  require_positive(phi, "Phi");
  std::vector<double> grid = opts.gamma_grid;
  if (grid.empty()) {
    require_positive(opts.gamma_min, "gamma_min");
    if (!(opts.gamma_max > opts.gamma_min)) throw InvalidArgument("design_irc_gamma: gamma_max <= gamma_min");
    if (opts.points_per_decade < 1) throw InvalidArgument("design_irc_gamma: points per decade must be >= 1");
    const double decades = std::log10(opts.gamma_max / opts.gamma_min);
    const auto count = static_cast<Index>(std::ceil(decades * opts.points_per_decade)) + 1;
    for (Index i = 0; i < count; ++i) {
      grid.push_back(opts.gamma_min * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(count - 1)));
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require_positive(grid[i], "gamma grid point");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("design_irc_gamma: gamma grid must increase");
  }
  if (grid.size() < 3) throw InvalidArgument("design_irc_gamma: gamma grid needs at least 3 points");

  // Lowest open-loop resonance.
  std::optional<Complex> first_mode;
  for (const Complex& p : poles(plant)) {
    if (p.imag() > 0.0 && (!first_mode || std::abs(p) < std::abs(*first_mode))) first_mode = p;
  }
  if (!first_mode) throw InvalidArgument("design_irc_gamma: plant has no resonant pole pair");

  IrcDesign design;
  design.open_loop_zeta = damping(*first_mode, DampingMeasure::DampingRatio);
  design.locus.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    LocusPoint pt;
    pt.gamma = grid[g];
    ComplexVector raw = loop_poles(plant, grid[g], phi);
    if (g == 0) {
      pt.poles = raw;
      design.tracked_index = nearest(raw, *first_mode);
    } else {
      const ComplexVector& prev = design.locus.back().poles;
      Matrix cost(prev.size(), raw.size());
      for (Index i = 0; i < prev.size(); ++i) {
        for (Index j = 0; j < raw.size(); ++j) cost(i, j) = std::abs(prev(i) - raw(j));
      }
      const std::vector<Index> perm = min_cost_assignment(cost);
      pt.poles = ComplexVector(raw.size());
      for (Index i = 0; i < raw.size(); ++i) pt.poles(i) = raw(perm[static_cast<std::size_t>(i)]);
    }
    pt.stable = (pt.poles.real().array() < 0.0).all();
    design.locus.push_back(std::move(pt));
  }

  const Index tracked = design.tracked_index;
  std::optional<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < design.locus.size(); ++g) {
    if (!design.locus[g].stable) continue;
    const double value = damping(design.locus[g].poles(tracked), opts.measure);
    if (value > best_value) {
      best_value = value;
      best = g;
    }
  }
  if (!best) throw ConvergenceError("design_irc_gamma: every loop on the gain grid is unstable");

  double gamma_star = grid[*best];
  Complex pole_star = design.locus[*best].poles(tracked);
  if (*best > 0 && *best + 1 < grid.size()) {
    const Complex anchor = pole_star;
    auto objective = [&](double log_gamma) {
      const ComplexVector ps = loop_poles(plant, std::exp(log_gamma), phi);
      if (!(ps.real().array() < 0.0).all()) return std::numeric_limits<double>::infinity();
      return -damping(ps(nearest(ps, anchor)), opts.measure);
    };
    const double lo = std::log(grid[*best - 1]);
    const double hi = std::log(grid[*best + 1]);
    const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(0.1 * opts.refine_tol / std::max(std::abs(hi), 1.0)))), 8,
                                std::numeric_limits<double>::digits / 2);
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::brent_find_minima(objective, lo, hi, bits, max_iter);
    if (-r.second > best_value) {
      gamma_star = std::exp(r.first);
      const ComplexVector ps = loop_poles(plant, gamma_star, phi);
      pole_star = ps(nearest(ps, anchor));
    }
  }
  design.gamma_star = gamma_star;
  design.tracked_pole = upper(pole_star);
  design.zeta_star = damping(pole_star, DampingMeasure::DampingRatio);
  design.decay_star = damping(pole_star, DampingMeasure::DecayRate);
  return design;
}

}  // namespace negimag
