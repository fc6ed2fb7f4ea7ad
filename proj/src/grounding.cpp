#include "ocplan/grounding.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace ocplan::grounding {

Estimate compute_estimate(double n_plus, double n_minus, double n_c, double prior) {
    if (!(n_plus >= 0.0) || !(n_minus >= 0.0)) throw ConfigError("estimated counts must be nonnegative");
    Estimate e;
    e.n_plus = n_plus;
    e.n_minus = n_minus;
    double seen = n_plus + n_minus;
    e.n_empty = std::max(0.0, n_c - seen);
    double denom = seen + e.n_empty;
    if (denom <= 0.0) throw ConfigError("degenerate estimate: no evidence and n_c = 0");
    if (std::isinf(seen)) {
        // Saturated; only the ratio of the counts matters.
        e.p_true = std::isinf(n_plus) ? (std::isinf(n_minus) ? 0.5 : 1.0) : 0.0;
        e.p_false = 1.0 - e.p_true;
        e.delta = 1.0;
        return e;
    }
    e.p_true = (n_plus + e.n_empty * prior) / denom;
    e.p_false = (n_minus + e.n_empty * (1.0 - prior)) / denom;
    e.delta = seen / denom;
    return e;
}

Decision classify(const Estimate& e, double p_thr) {
    if (!(p_thr > 0.5 && p_thr <= 1.0)) throw ConfigError("classification threshold must lie in (0.5, 1]");
    if (e.p_true >= p_thr) return Decision::yes;
    if (e.p_false >= p_thr) return Decision::no;
    return Decision::unclassified;
}

// ---------------------------------------------------------------------------

MixtureModel::MixtureModel(Eigen::MatrixXd sigma_init) : sigma_init_(std::move(sigma_init)) {
    GaussianComponent c;
    c.weight = 1.0;
    c.mean = Eigen::VectorXd::Zero(sigma_init_.rows());
    c.cov = sigma_init_;
    c.count = 1.0;
    comps_.push_back(std::move(c));
    factors_.resize(1);
    refactor(0);
}

MixtureModel::MixtureModel(Eigen::MatrixXd sigma_init, std::vector<GaussianComponent> components,
                           double n_total)
    : sigma_init_(std::move(sigma_init)), comps_(std::move(components)), n_total_(n_total) {
    if (comps_.empty()) throw ModelCorruptError("mixture needs at least one component");
    if (n_total_ < 0.0) throw ModelCorruptError("negative sample count");
    factors_.resize(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (comps_[i].mean.size() != dim() || comps_[i].cov.rows() != dim() || comps_[i].cov.cols() != dim())
            throw ModelCorruptError("component dimension mismatch");
        refactor(i);
    }
    check_invariants();
}

double MixtureModel::eigen_floor() const { return 1e-8 * sigma_init_.diagonal().mean(); }

void MixtureModel::refactor(std::size_t i) {
    auto& f = factors_[i];
    f.llt.compute(comps_[i].cov);
    if (f.llt.info() != Eigen::Success)
        throw ModelCorruptError("covariance of component " + std::to_string(i) + " is not positive definite");
    double logdet = 2.0 * f.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    f.log_norm = -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + logdet);
}

double MixtureModel::log_component(std::size_t i, const Eigen::VectorXd& z) const {
    Eigen::VectorXd d = z - comps_[i].mean;
    Eigen::VectorXd y = factors_[i].llt.matrixL().solve(d);
    return factors_[i].log_norm - 0.5 * y.squaredNorm();
}

double MixtureModel::density(const Eigen::VectorXd& z) const {
    if (z.size() != dim()) throw Error("sample dimension mismatch");
    double p = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (comps_[i].weight <= 0.0) continue;
        p += comps_[i].weight * std::exp(log_component(i, z));
    }
    return p;
}

bool MixtureModel::update(const Eigen::VectorXd& z, double thr_dens) {
    if (z.size() != dim()) throw Error("sample dimension mismatch");
    const double before = density(z);
    n_total_ += 1.0;
    const double n = n_total_;

    if (before < thr_dens) {
        for (auto& c : comps_) c.weight *= (n - 1.0) / n;
        GaussianComponent c;
        c.weight = 1.0 / n;
        c.mean = z;
        c.cov = sigma_init_;
        c.count = 1.0;
        comps_.push_back(std::move(c));
        factors_.emplace_back();
        refactor(comps_.size() - 1);
        return true;
    }

    std::vector<double> logs(comps_.size(), -std::numeric_limits<double>::infinity());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (comps_[i].weight <= 0.0) continue;
        logs[i] = std::log(comps_[i].weight) + log_component(i, z);
        mx = std::max(mx, logs[i]);
    }
    std::vector<double> resp(comps_.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        resp[i] = std::isinf(logs[i]) ? 0.0 : std::exp(logs[i] - mx);
        sum += resp[i];
    }
    const double floor = eigen_floor();
    const auto dim_n = static_cast<Eigen::Index>(dim());
    double wsum = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        auto& c = comps_[i];
        double r = resp[i] / sum;
        c.weight += (r - c.weight) / n;
        wsum += c.weight;
        if (r < 1e-12) continue;
        c.count += r;
        double eta = r / c.count;
        Eigen::VectorXd d = z - c.mean;
        c.mean += eta * d;
        c.cov = (1.0 - eta) * c.cov + eta * (1.0 - eta) * d * d.transpose();
        c.cov = 0.5 * (c.cov + c.cov.transpose());
        // Eigenvalue floor: cheap test first, full clamp only when needed.
        Eigen::LLT<Eigen::MatrixXd> probe(c.cov - floor * Eigen::MatrixXd::Identity(dim_n, dim_n));
        if (probe.info() != Eigen::Success) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.cov);
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor * (1.0 + 1e-6));
            c.cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            c.cov = 0.5 * (c.cov + c.cov.transpose());
        }
        refactor(i);
    }
    for (auto& c : comps_) c.weight /= wsum;
    return false;
}

void MixtureModel::check_invariants() const {
    double s = 0.0;
    for (const auto& c : comps_) {
        if (c.weight < 0.0) throw ModelCorruptError("negative mixture weight");
        s += c.weight;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ModelCorruptError("mixture weights do not sum to one");
    const double floor = eigen_floor();
    for (const auto& c : comps_) {
        if ((c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, c.cov.cwiseAbs().maxCoeff()))
            throw ModelCorruptError("covariance is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < floor * (1.0 - 1e-6))
            throw ModelCorruptError("covariance eigenvalue below the floor");
    }
}

// ---------------------------------------------------------------------------

Eigen::VectorXd sample_space_extent(const simworld::GeometryConfig& cfg) {
    // Samples are differences of two states, so each range is twice the
    // physical one.
    Eigen::VectorXd e(kDim);
    Eigen::Vector3d ws = cfg.workspace_max - cfg.workspace_min;
    e.head<3>() = 2.0 * ws;
    e.segment<3>(3).setConstant(4.0 * std::numbers::pi);
    // Largest roster object per axis: a table part in plan, the bottle in height.
    e.tail<3>() = 2.0 * Eigen::Vector3d(ws.x() / 3.0, ws.y(), 0.25);
    return e;
}

Eigen::MatrixXd GroundingParams::sigma_init() const {
    Eigen::VectorXd sd = init_scale * extent;
    return sd.array().square().matrix().asDiagonal();
}

void GroundingParams::validate() const {
    if (!(thr_dens >= 0.0)) throw ConfigError("thr_dens must be nonnegative");
    if (!(thr_delta >= 0.0 && thr_delta <= 1.0)) throw ConfigError("thr_delta must lie in [0, 1]");
    if (!(p_thr > 0.5 && p_thr <= 1.0)) throw ConfigError("p_thr must lie in (0.5, 1]");
    if (!(n_c >= 1.0)) throw ConfigError("n_c must be at least 1");
    if (!(prior >= 0.0 && prior <= 1.0)) throw ConfigError("prior must lie in [0, 1]");
    if (!(v_z_factor > 0.0)) throw ConfigError("V_z factor must be positive");
    if (!(init_scale > 0.0) || !(kde_floor_scale > 0.0)) throw ConfigError("scales must be positive");
    if (extent.size() < 1 || (extent.array() <= 0.0).any()) throw ConfigError("extents must be positive");
}

GroundingParams default_params(const simworld::GeometryConfig& cfg) {
    GroundingParams p;
    p.extent = sample_space_extent(cfg);
    return p;
}

Estimate PredicateEstimator::probability(const Eigen::VectorXd& z) const {
    auto [np, nm] = estimate_counts(z);
    return compute_estimate(np, nm, params_.n_c, params_.prior);
}

PredicateModel::PredicateModel(GroundingParams p)
    : PredicateEstimator(std::move(p)), pos_(params_.sigma_init()), neg_(params_.sigma_init()) {
    params_.validate();
}

PredicateModel::PredicateModel(GroundingParams p, MixtureModel pos, MixtureModel neg)
    : PredicateEstimator(std::move(p)), pos_(std::move(pos)), neg_(std::move(neg)) {
    params_.validate();
}

std::pair<double, double> PredicateModel::estimate_counts(const Eigen::VectorXd& z) const {
    const double vz = params_.v_z();
    double np = pos_.n_total() > 0 ? vz * pos_.n_total() * pos_.density(z) : 0.0;
    double nm = neg_.n_total() > 0 ? vz * neg_.n_total() * neg_.density(z) : 0.0;
    return {np, nm};
}

void PredicateModel::update(const Eigen::VectorXd& z, bool label) {
    (label ? pos_ : neg_).update(z, params_.thr_dens);
}

// ---------------------------------------------------------------------------

double kde_density(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& h) {
    if (samples.empty()) return 0.0;
    if ((h.array() <= 0.0).any()) throw ConfigError("bandwidth must be positive");
    const Eigen::ArrayXd inv = h.array().inverse();
    double norm = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(z.size())) * inv.prod();
    double s = 0.0;
    for (const auto& x : samples) s += std::exp(-0.5 * ((z - x).array() * inv).square().sum());
    return norm * s / static_cast<double>(samples.size());
}

Estimate kde_estimate(const std::vector<Eigen::VectorXd>& pos, const std::vector<Eigen::VectorXd>& neg,
                      const Eigen::VectorXd& z, double h, const GroundingParams& p) {
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
    Eigen::VectorXd hv = Eigen::VectorXd::Constant(z.size(), h);
    const double vz = p.v_z();
    double np = vz * static_cast<double>(pos.size()) * kde_density(pos, z, hv);
    double nm = vz * static_cast<double>(neg.size()) * kde_density(neg, z, hv);
    return compute_estimate(np, nm, p.n_c, p.prior);
}

KdeModel::KdeModel(GroundingParams p) : PredicateEstimator(std::move(p)) {
    params_.validate();
    for (Store* s : {&pos_, &neg_}) {
        s->mean = Eigen::VectorXd::Zero(params_.extent.size());
        s->m2 = Eigen::VectorXd::Zero(params_.extent.size());
    }
}

void KdeModel::add(Store& s, const Eigen::VectorXd& z) {
    s.samples.push_back(z);
    const double n = static_cast<double>(s.samples.size());
    Eigen::VectorXd d = z - s.mean;
    s.mean += d / n;
    s.m2 += d.cwiseProduct(z - s.mean);
}

Eigen::VectorXd KdeModel::bandwidth(const Store& s) const {
    const double n = static_cast<double>(std::max<std::size_t>(s.samples.size(), 1));
    const double d = static_cast<double>(params_.extent.size());
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(params_.extent.size());
    if (n > 1) sd = (s.m2 / (n - 1.0)).cwiseSqrt();
    sd = sd.cwiseMax(params_.kde_floor_scale * params_.extent);
    return sd * std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
}

Eigen::VectorXd KdeModel::bandwidth(bool label) const { return bandwidth(label ? pos_ : neg_); }

std::pair<double, double> KdeModel::estimate_counts(const Eigen::VectorXd& z) const {
    const double vz = params_.v_z();
    auto count = [&](const Store& s) {
        if (s.samples.empty()) return 0.0;
        return vz * static_cast<double>(s.samples.size()) * kde_density(s.samples, z, bandwidth(s));
    };
    return {count(pos_), count(neg_)};
}

void KdeModel::update(const Eigen::VectorXd& z, bool label) { add(label ? pos_ : neg_, z); }

// ---------------------------------------------------------------------------

std::string_view model_kind_token(ModelKind k) { return k == ModelKind::gmm ? "gmm" : "kde"; }

std::optional<ModelKind> model_kind_from_token(std::string_view t) {
    std::string c = canonical(t);
    if (c == "gmm") return ModelKind::gmm;
    if (c == "kde") return ModelKind::kde;
    return std::nullopt;
}

PredicateEstimator& ModelSet::at(const std::string& predicate) {
    auto it = models.find(predicate);
    if (it == models.end()) throw Error("no model for predicate '" + predicate + "'");
    return *it->second;
}

const PredicateEstimator& ModelSet::at(const std::string& predicate) const {
    auto it = models.find(predicate);
    if (it == models.end()) throw Error("no model for predicate '" + predicate + "'");
    return *it->second;
}

ModelSet make_models(ModelKind kind, const GroundingParams& params,
                     const std::vector<std::string>& predicates) {
    params.validate();
    ModelSet s;
    s.kind = kind;
    s.params = params;
    for (const auto& p : predicates) {
        if (kind == ModelKind::gmm) s.models[p] = std::make_unique<PredicateModel>(params);
        else s.models[p] = std::make_unique<KdeModel>(params);
    }
    return s;
}

std::vector<Query> evaluated_queries(const simworld::Scenario& sc, const std::vector<std::string>& predicates) {
    std::vector<Query> out;
    for (const auto& pred : predicates) {
        if (pred == "in") {
            if (!sc.objects.count(kHand)) continue;
            for (const auto& [o, _] : sc.objects)
                if (o != kHand) out.push_back({pred, kHand, o});
            continue;
        }
        for (const auto& [o1, _] : sc.objects)
            for (const auto& [o2, __] : sc.objects)
                if (o1 != o2) out.push_back({pred, o1, o2});
    }
    return out;
}

Eigen::VectorXd query_sample(const simworld::Scenario& sc, const Query& q) {
    auto a = sc.objects.find(q.o1);
    auto b = sc.objects.find(q.o2);
    if (a == sc.objects.end() || b == sc.objects.end()) throw Error("query references an unknown object");
    return make_sample(a->second, b->second).z;
}

Oracle ground_truth_oracle() {
    return [](const Query& q, const simworld::Scenario& sc) {
        return simworld::label_oracle(q.predicate, q.o1, q.o2, sc);
    };
}

double StepStats::performance_index() const {
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}
double StepStats::instruction_ratio() const {
    return total ? static_cast<double>(instructed) / static_cast<double>(total) : 0.0;
}
double StepStats::misclassification_ratio() const {
    return total ? static_cast<double>(misclassified) / static_cast<double>(total) : 0.0;
}

SymbolicState abstraction_step(ModelSet& models, const simworld::Scenario& sc, const Oracle& oracle,
                               double p_thr, StepStats& stats) {
    stats = StepStats{};
    SymbolicState out;
    double time_us = 0.0;
    const double thr_delta = models.params.thr_delta;
    std::vector<std::string> preds;
    for (const auto& [p, _] : models.models) preds.push_back(p);
    // Every estimate sees the models as they were when the scene arrived;
    // instructed samples are applied once the scene is done.
    std::vector<std::tuple<PredicateEstimator*, Eigen::VectorXd, bool>> pending;
    for (const auto& q : evaluated_queries(sc, preds)) {
        Eigen::VectorXd z = query_sample(sc, q);
        auto& model = models.at(q.predicate);
        auto t0 = std::chrono::steady_clock::now();
        Estimate e = model.probability(z);
        time_us += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
        Decision d = classify(e, p_thr);
        ++stats.total;
        Atom atom = simworld::predicate_atom(q.predicate, q.o1, q.o2);
        if (e.delta < thr_delta || d == Decision::unclassified) {
            bool label = oracle(q, sc);
            pending.emplace_back(&model, std::move(z), label);
            ++stats.instructed;
            if (label) out.insert(atom);
            continue;
        }
        bool truth = simworld::label_oracle(q.predicate, q.o1, q.o2, sc);
        if ((d == Decision::yes) == truth) ++stats.correct;
        else ++stats.misclassified;
        if (d == Decision::yes) out.insert(atom);
    }
    for (auto& [model, z, label] : pending) model->update(z, label);
    stats.inference_us = stats.total ? time_us / static_cast<double>(stats.total) : 0.0;
    return out;
}

}  // namespace ocplan::grounding
