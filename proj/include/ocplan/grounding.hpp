#pragma once

#include "ocplan/model.hpp"
#include "ocplan/simworld.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ocplan::grounding {

class ModelCorruptError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr int kDim = 9;

/// Eq. (1)/(2) output.
struct Estimate {
    double p_true = 0.5;
    double p_false = 0.5;
    double delta = 0.0;  ///< confidence in [0, 1]
    double n_plus = 0.0;
    double n_minus = 0.0;
    double n_empty = 0.0;
};

/// Density-estimate probability and confidence from estimated counts.
/// Shared by every density backend.
Estimate compute_estimate(double n_plus, double n_minus, double n_c, double prior);

enum class Decision { yes, no, unclassified };

/// Inclusive thresholds: yes if p_true >= p_thr, no if p_false >= p_thr.
Decision classify(const Estimate& e, double p_thr);

// ---------------------------------------------------------------------------
// Gaussian mixture

struct GaussianComponent {
    double weight = 1.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double count = 1.0;  ///< effective sample count, including one prior pseudo-sample
};

class MixtureModel {
public:
    MixtureModel() = default;
    /// One placeholder component at the origin with covariance sigma_init.
    explicit MixtureModel(Eigen::MatrixXd sigma_init);
    MixtureModel(Eigen::MatrixXd sigma_init, std::vector<GaussianComponent> components,
                 double n_total);

    std::size_t size() const { return comps_.size(); }
    int dim() const { return static_cast<int>(sigma_init_.rows()); }
    double n_total() const { return n_total_; }
    const std::vector<GaussianComponent>& components() const { return comps_; }
    const Eigen::MatrixXd& sigma_init() const { return sigma_init_; }
    double eigen_floor() const;

    /// sum_i alpha_i N(z; mu_i, Sigma_i). Throws ModelCorruptError on a
    /// covariance that is not positive definite.
    double density(const Eigen::VectorXd& z) const;

    /// Absorbs one sample. When the pre-update density is below thr_dens a
    /// component is generated at z and takes the sample; otherwise every
    /// component moves by its responsibility. Returns true on generation.
    bool update(const Eigen::VectorXd& z, double thr_dens);

    /// Throws ModelCorruptError unless weights sum to one and every
    /// covariance honours the eigenvalue floor.
    void check_invariants() const;

private:
    struct Factor {
        Eigen::LLT<Eigen::MatrixXd> llt;
        double log_norm = 0.0;  ///< log of the normalising constant
    };

    void refactor(std::size_t i);
    double log_component(std::size_t i, const Eigen::VectorXd& z) const;

    Eigen::MatrixXd sigma_init_;
    std::vector<GaussianComponent> comps_;
    std::vector<Factor> factors_;
    double n_total_ = 0.0;
};

/// Range of each of the 9 sample dimensions. Built from the workspace
/// size, a full turn per angle, and the largest roster object per axis.
Eigen::VectorXd sample_space_extent(const simworld::GeometryConfig& cfg);

struct GroundingParams {
    double thr_dens = 5e-4;
    double thr_delta = 0.7;
    double p_thr = 0.8;
    double n_c = 20.0;
    double prior = 0.5;
    double v_z_factor = 1e-9;  ///< V_z = v_z_factor * V_T
    /// Relative standard deviation of new components along each dimension.
    double init_scale = 0.05;
    /// KDE bandwidth floor relative to the extent of each dimension.
    double kde_floor_scale = 0.01;
    Eigen::VectorXd extent = Eigen::VectorXd::Ones(kDim);

    double v_total() const { return extent.prod(); }
    double v_z() const { return v_z_factor * v_total(); }
    Eigen::MatrixXd sigma_init() const;
    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

GroundingParams default_params(const simworld::GeometryConfig& cfg = {});

/// Counts and update interface shared by the GMM and KDE backends.
class PredicateEstimator {
public:
    virtual ~PredicateEstimator() = default;
    /// (n_plus, n_minus) at z.
    virtual std::pair<double, double> estimate_counts(const Eigen::VectorXd& z) const = 0;
    virtual void update(const Eigen::VectorXd& z, bool label) = 0;

    Estimate probability(const Eigen::VectorXd& z) const;
    const GroundingParams& params() const { return params_; }

protected:
    explicit PredicateEstimator(GroundingParams p) : params_(std::move(p)) {}
    GroundingParams params_;
};

class PredicateModel : public PredicateEstimator {
public:
    explicit PredicateModel(GroundingParams p);
    PredicateModel(GroundingParams p, MixtureModel pos, MixtureModel neg);

    std::pair<double, double> estimate_counts(const Eigen::VectorXd& z) const override;
    void update(const Eigen::VectorXd& z, bool label) override;

    const MixtureModel& positive() const { return pos_; }
    const MixtureModel& negative() const { return neg_; }

private:
    MixtureModel pos_;
    MixtureModel neg_;
};

/// Product of per-dimension Gaussian kernels of width h over the samples.
double kde_density(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& h);

/// Isotropic-bandwidth KDE estimate with the shared count/Eq. (1) path.
Estimate kde_estimate(const std::vector<Eigen::VectorXd>& pos, const std::vector<Eigen::VectorXd>& neg,
                      const Eigen::VectorXd& z, double h, const GroundingParams& p);

/// Kernel density baseline; stores every labeled sample and uses a
/// per-dimension Silverman bandwidth from the running spread.
class KdeModel : public PredicateEstimator {
public:
    explicit KdeModel(GroundingParams p);

    std::pair<double, double> estimate_counts(const Eigen::VectorXd& z) const override;
    void update(const Eigen::VectorXd& z, bool label) override;

    const std::vector<Eigen::VectorXd>& positives() const { return pos_.samples; }
    const std::vector<Eigen::VectorXd>& negatives() const { return neg_.samples; }
    Eigen::VectorXd bandwidth(bool label) const;

private:
    struct Store {
        std::vector<Eigen::VectorXd> samples;
        Eigen::VectorXd mean;
        Eigen::VectorXd m2;
    };
    void add(Store& s, const Eigen::VectorXd& z);
    Eigen::VectorXd bandwidth(const Store& s) const;

    Store pos_;
    Store neg_;
};

// ---------------------------------------------------------------------------
// Online abstraction

enum class ModelKind { gmm, kde };
std::string_view model_kind_token(ModelKind k);
std::optional<ModelKind> model_kind_from_token(std::string_view t);

inline const std::vector<std::string> kGroundingPredicates{"on", "under", "in"};

/// One model per grounding predicate.
struct ModelSet {
    ModelKind kind = ModelKind::gmm;
    GroundingParams params;
    std::map<std::string, std::unique_ptr<PredicateEstimator>> models;

    PredicateEstimator& at(const std::string& predicate);
    const PredicateEstimator& at(const std::string& predicate) const;
};

ModelSet make_models(ModelKind kind, const GroundingParams& params,
                     const std::vector<std::string>& predicates = kGroundingPredicates);

struct Query {
    std::string predicate;
    std::string o1;
    std::string o2;
};

/// on/under over ordered pairs of distinct objects; in over (hand, o).
std::vector<Query> evaluated_queries(const simworld::Scenario& sc,
                                     const std::vector<std::string>& predicates = kGroundingPredicates);

/// z(o1) - z(o2) as a dynamic vector.
Eigen::VectorXd query_sample(const simworld::Scenario& sc, const Query& q);

using Oracle = std::function<bool(const Query&, const simworld::Scenario&)>;
Oracle ground_truth_oracle();

struct StepStats {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t misclassified = 0;
    std::size_t instructed = 0;
    double inference_us = 0.0;  ///< mean wall time of one estimate

    double performance_index() const;
    double instruction_ratio() const;
    double misclassification_ratio() const;
};

/// Evaluates every query of the scenario against the models as they stood
/// when the scenario arrived. Low-confidence or unclassified
/// queries go to the oracle and update the model afterwards; the rest are classified
/// and scored against the ground truth. Returns the atoms judged true.
SymbolicState abstraction_step(ModelSet& models, const simworld::Scenario& sc, const Oracle& oracle,
                               double p_thr, StepStats& stats);

}  // namespace ocplan::grounding
