#include "rotopat/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rotopat/cg.hpp"
#include "rotopat/errors.hpp"
#include "rotopat/kernels.hpp"
#include "rotopat/rays.hpp"

namespace rotopat {

namespace {

// Runs body(i) for i in [0, n) concurrently; the first exception is rethrown.
template <class F>
void parallel_for(int n, F&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(rotopat_parallel_for)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double sum_squares(const BoundaryTrace& t) {
  double s = 0.0;
  for (double v : t.raw()) s += v * v;
  return s;
}

WaveOptions wave_options_for(const DomainMask& mask, WaveOptions o) {
  if (o.source_radius <= 0.0 && mask.omega().radius > 0.0)
    o.source_radius = std::min(mask.grid().rho(),
                               norm(mask.omega().center) + mask.omega().radius + 2.0 * mask.grid().spacing());
  return o;
}

}  // namespace

double h1_norm_field(const ScalarField& f) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  double value = 0.0;
  double grad = 0.0;
  for (int j = 0; j < g.side(); ++j)
    for (int i = 0; i < g.side(); ++i) {
      const double v = f(i, j);
      value += v * v;
      if (i + 1 < g.side()) {
        const double d = f(i + 1, j) - v;
        grad += d * d;
      }
      if (j + 1 < g.side()) {
        const double d = f(i, j + 1) - v;
        grad += d * d;
      }
    }
  return std::sqrt(value * h * h + grad);
}

double h1_norm_trace(const BoundaryTrace& d, double ds) {
  const int N = d.steps();
  const int K = d.points();
  const double dt = d.dt();
  double value = 0.0;
  double dtime = 0.0;
  double dangle = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double w = (n == 0 || n == N) ? 0.5 : 1.0;
    const auto row = d.row(n);
    double v = 0.0;
    double a = 0.0;
    for (int k = 0; k < K; ++k) {
      const double x = row[static_cast<std::size_t>(k)];
      v += x * x;
      const double dx = row[static_cast<std::size_t>((k + 1) % K)] - x;
      a += dx * dx;
    }
    value += w * v;
    dangle += w * a;
    if (n < N) {
      const auto next = d.row(n + 1);
      for (int k = 0; k < K; ++k) {
        const double dx = next[static_cast<std::size_t>(k)] - row[static_cast<std::size_t>(k)];
        dtime += dx * dx;
      }
    }
  }
  return std::sqrt(value * dt * ds + dtime * ds / dt + dangle * dt / ds);
}

double poincare_constant(const DomainMask& mask, double tol) {
  const DiskStencil st(mask.grid(), mask.omega());
  const int n = st.unknowns();
  if (n == 0) throw Error("Poincare constant needs a nonempty omega");
  const kernels::DiskOperator op{st.neighbor_table(), st.diagonal()};
  auto apply = [&op](std::span<const double> x, std::span<double> y) { kernels::omp::disk_apply(op, x, y); };
  std::vector<double> inv_diag(st.diagonal().size());
  for (std::size_t u = 0; u < inv_diag.size(); ++u) inv_diag[u] = 1.0 / st.diagonal()[u];

  std::vector<double> x(static_cast<std::size_t>(n), 1.0);
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  std::vector<double> ly(static_cast<std::size_t>(n));
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    const auto cg = conjugate_gradient(apply, inv_diag, x, y, 1e-13, 20 * n + 100);
    if (!cg.converged) throw SolverError("Poincare inverse iteration solve did not converge", cg.relative_residual,
                                         cg.iterations);
    apply(y, ly);
    const double yy = kernels::omp::dot(y, y);
    const double next = kernels::omp::dot(y, ly) / yy;
    const double scale = 1.0 / std::sqrt(yy);
    for (std::size_t u = 0; u < x.size(); ++u) x[u] = y[u] * scale;
    if (it > 0 && std::abs(next - lambda) <= tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  const double h = mask.grid().spacing();
  return h / std::sqrt(lambda);
}

ForwardModel::ForwardModel(std::shared_ptr<const DomainMask> mask, AcquisitionSetup setup, SoundSpeedMap c,
                           ForwardModelOptions options)
    : mask_(std::move(mask)),
      setup_((setup.validate(), std::move(setup))),
      diffusion_(mask_->grid(), options.diffusion),
      wave_(mask_->grid(), std::move(c), BoundaryParametrization::for_grid(mask_->grid()), setup_.total_time,
            wave_options_for(*mask_, options.wave)) {
  for (int i = 0; i < setup_.rotation_count(); ++i)
    chi_.push_back(build_cutoff(setup_, i, wave_.boundary(), wave_.time()));
}

std::vector<DiffusionSolution> ForwardModel::fields(const ScalarField& sigma) const {
  return forward_family(diffusion_, sigma, setup_, wave_.boundary());
}

BoundaryTrace ForwardModel::measure_source(int i, const ScalarField& H) const {
  return measure(wave_.record(H), cutoff(i));
}

std::vector<BoundaryTrace> ForwardModel::data(const ScalarField& sigma, const std::vector<DiffusionSolution>& u) const {
  const int m = rotation_count();
  if (static_cast<int>(u.size()) != m) throw std::invalid_argument("one diffusion field per rotation expected");
  std::vector<BoundaryTrace> out(static_cast<std::size_t>(m));
  parallel_for(m, [&](int i) {
    ScalarField H = sigma;
    const auto& ui = u[static_cast<std::size_t>(i)].u;
    for (std::size_t k = 0; k < H.size(); ++k) H[k] *= ui[k];
    out[static_cast<std::size_t>(i)] = measure_source(i, H);
  });
  return out;
}

std::vector<BoundaryTrace> ForwardModel::data(const ScalarField& sigma) const { return data(sigma, fields(sigma)); }

ScalarField ForwardModel::back_project(const BoundaryTrace& h) const { return wave_.back_propagate(h); }

LinearizedOperator::LinearizedOperator(const ForwardModel& model, const ScalarField& background)
    : model_(&model), background_(background), fields_(model.fields(background)) {}

BoundaryTrace LinearizedOperator::rotation_data(int j, const ScalarField& delta) const {
  ScalarField H = delta;
  const auto& u = fields_.at(static_cast<std::size_t>(j)).u;
  for (std::size_t k = 0; k < H.size(); ++k) H[k] *= u[k];
  return model_->measure_source(j, H);
}

BoundaryTrace LinearizedOperator::principal_data(const ScalarField& delta) const {
  const int m = model_->rotation_count();
  std::vector<BoundaryTrace> parts(static_cast<std::size_t>(m));
  parallel_for(m, [&](int i) { parts[static_cast<std::size_t>(i)] = rotation_data(i, delta); });
  BoundaryTrace sum = model_->zero_trace();
  for (const auto& p : parts) sum += p;
  return sum;
}

BoundaryTrace LinearizedOperator::higher_order_data(const ScalarField& delta) const {
  const int m = model_->rotation_count();
  std::vector<BoundaryTrace> parts(static_cast<std::size_t>(m));
  parallel_for(m, [&](int i) {
    ScalarField du =
        solve_linearized(model_->diffusion(), background_, fields_[static_cast<std::size_t>(i)].u, delta);
    for (std::size_t k = 0; k < du.size(); ++k) du[k] *= background_[k];
    parts[static_cast<std::size_t>(i)] = model_->measure_source(i, du);
  });
  BoundaryTrace sum = model_->zero_trace();
  for (const auto& p : parts) sum += p;
  return sum;
}

ScalarField LinearizedOperator::apply(const ScalarField& delta) const {
  const ScalarField full = model_->back_project(principal_data(delta));
  ScalarField out(full.grid());
  for (std::size_t k : model_->mask()->omega_nodes()) out[k] = full[k];
  return out;
}

CoarseBasis::CoarseBasis(const Grid& coarse, const DomainMask& fine_mask) : coarse_(coarse), mask_(fine_mask) {
  if (std::abs(coarse.rho() - fine_mask.grid().rho()) > 1e-14)
    throw std::invalid_argument("coarse and fine grids describe different balls");
  for (std::size_t k = 0; k < coarse.node_count(); ++k)
    if (mask_.omega().contains(coarse.node(k))) nodes_.push_back(k);
}

ScalarField CoarseBasis::expand(const Eigen::VectorXd& v) const {
  if (v.size() != size()) throw std::invalid_argument("coefficient vector has the wrong length");
  std::vector<int> index(coarse_.node_count(), -1);
  for (std::size_t j = 0; j < nodes_.size(); ++j) index[nodes_[j]] = static_cast<int>(j);
  const Grid& fine = mask_.grid();
  const double H = coarse_.spacing();
  ScalarField out(fine);
  for (std::size_t k : mask_.omega_nodes()) {
    const Point x = fine.node(k);
    const double fx = (x.x - coarse_.origin()) / H;
    const double fy = (x.y - coarse_.origin()) / H;
    const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, coarse_.cells() - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, coarse_.cells() - 1);
    const double tx = fx - i0;
    const double ty = fy - j0;
    double s = 0.0;
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        const int q = index[coarse_.index(i0 + a, j0 + b)];
        if (q < 0) continue;
        s += (a ? tx : 1.0 - tx) * (b ? ty : 1.0 - ty) * v[q];
      }
    out[k] = s;
  }
  return out;
}

Eigen::VectorXd CoarseBasis::sample(const ScalarField& f) const {
  Eigen::VectorXd out(size());
  for (int j = 0; j < size(); ++j) out[j] = f.sample(node(j));
  return out;
}

namespace {

void check_budget(const CoarseBasis& basis, int budget) {
  if (basis.size() > budget) {
    std::ostringstream os;
    os << "coarse grid has " << basis.size() << " omega nodes, above the dense budget of " << budget;
    throw Error(os.str());
  }
  if (basis.size() == 0) throw Error("coarse grid has no omega nodes");
}

}  // namespace

KappaMatrix assemble_kappa(const LinearizedOperator& op, const Grid& coarse, int budget) {
  const CoarseBasis basis(coarse, *op.model().mask());
  check_budget(basis, budget);
  const int n = basis.size();
  KappaMatrix out{Eigen::MatrixXd::Zero(n, n), {}};
  for (int j = 0; j < n; ++j) out.nodes.push_back(basis.node(j));
  parallel_for(n, [&](int j) {
    const ScalarField col = op.apply(basis.expand(Eigen::VectorXd::Unit(n, j)));
    out.matrix.col(j) = basis.sample(col);
  });
  return out;
}

Eigen::MatrixXd assemble_rotation_operator(const LinearizedOperator& op, int j, const Grid& coarse, int budget) {
  const CoarseBasis basis(coarse, *op.model().mask());
  check_budget(basis, budget);
  const int n = basis.size();
  const TimeAxis& time = op.model().time();
  const int K = op.model().boundary().size();
  const double ds = op.model().boundary().arc_length_step();
  const Eigen::Index rows = static_cast<Eigen::Index>(time.samples()) * K;
  Eigen::MatrixXd m(rows, n);
  parallel_for(n, [&](int c) {
    const BoundaryTrace t = op.rotation_data(j, basis.expand(Eigen::VectorXd::Unit(n, c)));
    for (int s = 0; s < time.samples(); ++s) {
      const double w = std::sqrt(((s == 0 || s == time.steps) ? 0.5 : 1.0) * time.dt * ds);
      for (int k = 0; k < K; ++k) m(static_cast<Eigen::Index>(s) * K + k, c) = w * t(s, k);
    }
  });
  return m;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

std::vector<ScalarField> visibility_factors(const ForwardModel& model, int n_dirs) {
  if (n_dirs < 8) throw std::invalid_argument("symbol weight needs at least 8 directions");
  const auto& mask = *model.mask();
  const Grid& grid = model.grid();
  const int m = model.rotation_count();
  std::vector<Cutoff> cutoffs;
  for (int i = 0; i < m; ++i) cutoffs.push_back(model.setup().cutoff(i));
  std::vector<ScalarField> out(static_cast<std::size_t>(m), ScalarField(grid));
  const auto& nodes = mask.omega_nodes();
  parallel_for(static_cast<int>(nodes.size()), [&](int q) {
    const std::size_t k = nodes[static_cast<std::size_t>(q)];
    const Point x = grid.node(k);
    std::vector<double> acc(static_cast<std::size_t>(m), 0.0);
    for (int d = 0; d < n_dirs; ++d) {
      const double a = kTwoPi * d / n_dirs;
      const Ray r = trace_ray(x, {std::cos(a), std::sin(a)}, model.sound_speed());
      if (r.trapped) continue;
      const double ap = polar_angle(r.exit_plus);
      const double am = polar_angle(r.exit_minus);
      for (int i = 0; i < m; ++i) {
        const auto& chi = cutoffs[static_cast<std::size_t>(i)];
        acc[static_cast<std::size_t>(i)] += 0.5 * (chi(ap, r.tau_plus) + chi(am, r.tau_minus));
      }
    }
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)][k] = acc[static_cast<std::size_t>(i)] / n_dirs;
  });
  return out;
}

SymbolWeight symbol_weight(const std::vector<ScalarField>& factors, const std::vector<DiffusionSolution>& fields,
                           const DomainMask& mask) {
  if (factors.size() != fields.size()) throw std::invalid_argument("one visibility factor per rotation expected");
  SymbolWeight out{ScalarField(mask.grid()), std::numeric_limits<double>::infinity()};
  for (std::size_t k : mask.omega_nodes()) {
    double w = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) w += factors[i][k] * fields[i].u[k];
    out.w[k] = w;
    out.beta = std::min(out.beta, w);
  }
  if (mask.omega_nodes().empty()) out.beta = 0.0;
  return out;
}

SymbolWeight symbol_weight(const ForwardModel& model, const std::vector<DiffusionSolution>& fields, int n_dirs) {
  return symbol_weight(visibility_factors(model, n_dirs), fields, *model.mask());
}

double relative_l2_error(const ScalarField& a, const ScalarField& b, const DomainMask& mask) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k : mask.omega_nodes()) {
    const double d = a[k] - b[k];
    num += d * d;
    den += b[k] * b[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ReconstructionState reconstruct(const ForwardModel& model, const std::vector<BoundaryTrace>& data,
                                const AbsorptionMap& sigma0, const ReconstructionOptions& options,
                                const AbsorptionMap* truth) {
  const int m = model.rotation_count();
  if (static_cast<int>(data.size()) != m) throw std::invalid_argument("one data trace per rotation expected");
  const BoundaryTrace shape = model.zero_trace();
  for (const auto& d : data)
    if (!d.same_shape(shape)) throw std::invalid_argument("data trace shape does not match the forward model");
  if (!(sigma0.grid() == model.grid())) throw std::invalid_argument("initial iterate lives on a different grid");
  if (!(options.step > 0.0) || options.max_iterations < 0 || !(options.floor_fraction > 0.0))
    throw std::invalid_argument("invalid reconstruction options");

  const auto& mask = model.mask();
  double data_sq = 0.0;
  for (const auto& d : data) data_sq += sum_squares(d);
  const double data_norm = std::sqrt(data_sq);
  const auto factors = visibility_factors(model, options.n_dirs);
  const double truth_h1 = truth ? h1_norm_field(truth->field()) : 0.0;

  ReconstructionState state{sigma0, {}, ScalarField(model.grid()), {}, 0, false, false, {}};
  ScalarField sigma = sigma0.field();
  double previous = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int k = 0;; ++k) {
    const auto u = model.fields(sigma);
    const auto predicted = model.data(sigma, u);
    state.residuals.assign(data.begin(), data.end());
    double res_sq = 0.0;
    for (int i = 0; i < m; ++i) {
      state.residuals[static_cast<std::size_t>(i)] -= predicted[static_cast<std::size_t>(i)];
      res_sq += sum_squares(state.residuals[static_cast<std::size_t>(i)]);
    }
    const double residual = data_norm > 0.0 ? std::sqrt(res_sq) / data_norm : std::sqrt(res_sq);

    IterationRecord rec{k, residual, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()};
    if (truth) {
      rec.l2_error = relative_l2_error(sigma, truth->field(), *mask);
      const double d = h1_norm_field(sigma - truth->field());
      rec.h1_error = truth_h1 > 0.0 ? d / truth_h1 : d;
    }
    state.history.push_back(rec);
    state.sigma = AbsorptionMap(sigma, mask);
    state.iterations = k;
    if (options.progress) options.progress(k, residual);
    if (residual <= options.tol) {
      state.converged = true;
      break;
    }
    if (k >= options.max_iterations) break;

    growing = residual > previous ? growing + 1 : 0;
    previous = residual;
    if (growing >= options.divergence_window) {
      std::ostringstream os;
      os << "reconstruction diverged: residual grew for " << growing << " consecutive steps (residual history:";
      for (const auto& h : state.history) os << ' ' << h.residual;
      os << ')';
      state.diverged = true;
      state.message = os.str();
      break;
    }

    const SymbolWeight w = symbol_weight(factors, u, *mask);
    double w_max = 0.0;
    for (std::size_t q : mask->omega_nodes()) w_max = std::max(w_max, w.w[q]);
    const double floor = w_max > 0.0 ? options.floor_fraction * w_max : 1.0;

    BoundaryTrace sum = model.zero_trace();
    for (const auto& r : state.residuals) sum += r;
    state.back_projected = model.back_project(sum);
    for (std::size_t q : mask->omega_nodes())
      sigma[q] += options.step * state.back_projected[q] / std::max(w.w[q], floor);
    sigma = project_admissible(sigma, mask).field();
  }
  return state;
}

StabilityReport stability_experiment(const ForwardModel& model,
                                     const std::vector<std::pair<AbsorptionMap, AbsorptionMap>>& pairs) {
  StabilityReport rep;
  rep.poincare = model.mask()->omega_count() ? poincare_constant(*model.mask()) : 0.0;
  const double ds = model.boundary().arc_length_step();
  for (const auto& [sigma, sigma_t] : pairs) {
    PairResult r;
    r.sigma_difference = h1_norm_field(sigma.field() - sigma_t.field());
    r.smallness = rep.poincare * w1inf_norm(sigma_t.field());
    const auto d1 = model.data(sigma.field());
    const auto d2 = model.data(sigma_t.field());
    double scale = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
      r.data_difference += h1_norm_trace(d1[i] - d2[i], ds);
      scale += h1_norm_trace(d1[i], ds) + h1_norm_trace(d2[i], ds);
    }
    if (r.sigma_difference == 0.0) {
      r.excluded = true;
    } else if (r.data_difference <= 1e-13 * std::max(scale, 1.0)) {
      r.zero_data = true;
      rep.injectivity_violated = true;
    } else {
      r.ratio = r.sigma_difference / r.data_difference;
      rep.c_star = std::max(rep.c_star, r.ratio);
    }
    if (!r.excluded) ++rep.tested;
    rep.max_smallness = std::max(rep.max_smallness, r.smallness);
    rep.pairs.push_back(r);
  }
  return rep;
}

double domination_factor(const LinearizedOperator& op, const ScalarField& delta) {
  const double ds = op.model().boundary().arc_length_step();
  const double principal = h1_norm_trace(op.principal_data(delta), ds);
  const double higher = h1_norm_trace(op.higher_order_data(delta), ds);
  if (principal == 0.0) return higher == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return higher / principal;
}

}  // namespace rotopat
