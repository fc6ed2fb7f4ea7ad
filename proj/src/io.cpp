#include "ocplan/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ocplan::io {

IoError::IoError(const std::filesystem::path& path, const std::string& what)
    : Error(path.string() + ": " + what), path_(path) {}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(path, "read failed");
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return std::to_string(v);
    return std::string(buf, end);
}

namespace {

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        a.push_back(row);
    }
    return a;
}

Eigen::VectorXd to_vec(const json& j, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw Error("expected an array of " + std::to_string(n) + " numbers");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

Eigen::MatrixXd to_mat(const json& j, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw Error("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) m.row(r) = to_vec(j.at(static_cast<std::size_t>(r)), n).transpose();
    return m;
}

void check_schema(const json& j, const char* schema) {
    if (!j.is_object() || j.value("schema", std::string{}) != schema)
        throw Error(std::string("expected schema ") + schema);
}

json atom_json(const Atom& a) {
    json row = json::array({a.predicate});
    for (const auto& x : a.args) row.push_back(x);
    return row;
}

Atom atom_from(const json& j) {
    if (!j.is_array() || j.empty()) throw Error("atom must be a non-empty array");
    std::vector<std::string> args;
    for (std::size_t i = 1; i < j.size(); ++i) args.push_back(j[i].get<std::string>());
    return Atom(j[0].get<std::string>(), std::move(args));
}

json mixture_json(const grounding::MixtureModel& m) {
    json comps = json::array();
    for (const auto& c : m.components())
        comps.push_back({{"weight", c.weight}, {"count", c.count}, {"mean", vec(c.mean)}, {"cov", mat(c.cov)}});
    return {{"K", m.size()}, {"n_T", m.n_total()}, {"components", comps}};
}

grounding::MixtureModel mixture_from(const json& j, const grounding::GroundingParams& p) {
    std::vector<grounding::GaussianComponent> comps;
    for (const auto& c : j.at("components")) {
        grounding::GaussianComponent g;
        g.weight = c.at("weight").get<double>();
        g.count = c.at("count").get<double>();
        g.mean = to_vec(c.at("mean"), grounding::kDim);
        g.cov = to_mat(c.at("cov"), grounding::kDim);
        comps.push_back(std::move(g));
    }
    if (j.at("K").get<std::size_t>() != comps.size()) throw grounding::ModelCorruptError("K does not match components");
    return grounding::MixtureModel(p.sigma_init(), std::move(comps), j.at("n_T").get<double>());
}

json params_json(const grounding::GroundingParams& p) {
    return {{"thr_dens", p.thr_dens},     {"thr_delta", p.thr_delta},
            {"p_thr", p.p_thr},           {"n_c", p.n_c},
            {"prior", p.prior},           {"v_z_factor", p.v_z_factor},
            {"init_scale", p.init_scale}, {"kde_floor_scale", p.kde_floor_scale},
            {"extent", vec(p.extent)}};
}

grounding::GroundingParams params_from(const json& j) {
    grounding::GroundingParams p;
    p.thr_dens = j.at("thr_dens").get<double>();
    p.thr_delta = j.at("thr_delta").get<double>();
    p.p_thr = j.at("p_thr").get<double>();
    p.n_c = j.at("n_c").get<double>();
    p.prior = j.at("prior").get<double>();
    p.v_z_factor = j.at("v_z_factor").get<double>();
    p.init_scale = j.at("init_scale").get<double>();
    p.kde_floor_scale = j.at("kde_floor_scale").get<double>();
    p.extent = to_vec(j.at("extent"), grounding::kDim);
    return p;
}

}  // namespace

json scenario_to_json(const simworld::Scenario& sc) {
    json objects = json::object();
    for (const auto& [name, s] : sc.objects)
        objects[name] = {{"position", vec(s.position)}, {"orientation", vec(s.orientation)}, {"bbox", vec(s.bbox)}};
    json atoms = json::array();
    for (const auto& a : sc.ground_truth) atoms.push_back(atom_json(a));
    const auto& c = sc.cfg;
    return {{"schema", kScenarioSchema},
            {"id", sc.id},
            {"seed", sc.seed},
            {"cfg",
             {{"contact_tol", c.contact_tol},
              {"penetration_tol", c.penetration_tol},
              {"min_overlap", c.min_overlap},
              {"workspace_min", vec(c.workspace_min)},
              {"workspace_max", vec(c.workspace_max)}}},
            {"objects", objects},
            {"atoms", atoms}};
}

simworld::Scenario scenario_from_json(const json& j) {
    check_schema(j, kScenarioSchema);
    try {
        simworld::Scenario sc;
        sc.id = j.at("id").get<int>();
        sc.seed = j.at("seed").get<std::uint64_t>();
        const auto& c = j.at("cfg");
        sc.cfg.contact_tol = c.at("contact_tol").get<double>();
        sc.cfg.penetration_tol = c.at("penetration_tol").get<double>();
        sc.cfg.min_overlap = c.at("min_overlap").get<double>();
        sc.cfg.workspace_min = to_vec(c.at("workspace_min"), 3);
        sc.cfg.workspace_max = to_vec(c.at("workspace_max"), 3);
        sc.cfg.validate();
        for (const auto& [name, o] : j.at("objects").items()) {
            PhysicalObjectState s;
            s.position = to_vec(o.at("position"), 3);
            s.orientation = to_vec(o.at("orientation"), 3);
            s.bbox = to_vec(o.at("bbox"), 3);
            sc.objects.emplace(name, s);
        }
        for (const auto& a : j.at("atoms")) sc.ground_truth.insert(atom_from(a));
        return sc;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed scenario: ") + e.what());
    }
}

json model_to_json(const grounding::ModelSet& models) {
    json preds = json::object();
    for (const auto& [name, est] : models.models) {
        if (models.kind == grounding::ModelKind::gmm) {
            const auto& m = dynamic_cast<const grounding::PredicateModel&>(*est);
            preds[name] = {{"positive", mixture_json(m.positive())}, {"negative", mixture_json(m.negative())}};
        } else {
            const auto& m = dynamic_cast<const grounding::KdeModel&>(*est);
            auto samples = [](const std::vector<Eigen::VectorXd>& v) {
                json a = json::array();
                for (const auto& z : v) a.push_back(vec(z));
                return a;
            };
            preds[name] = {{"positive", {{"samples", samples(m.positives())}}},
                           {"negative", {{"samples", samples(m.negatives())}}}};
        }
    }
    return {{"schema", kModelSchema},
            {"kind", std::string(grounding::model_kind_token(models.kind))},
            {"params", params_json(models.params)},
            {"predicates", preds}};
}

grounding::ModelSet model_from_json(const json& j) {
    try {
        check_schema(j, kModelSchema);
        auto kind = grounding::model_kind_from_token(j.at("kind").get<std::string>());
        if (!kind) throw grounding::ModelCorruptError("unknown model kind");
        grounding::GroundingParams p = params_from(j.at("params"));
        p.validate();
        grounding::ModelSet set;
        set.kind = *kind;
        set.params = p;
        for (const auto& [name, m] : j.at("predicates").items()) {
            if (*kind == grounding::ModelKind::gmm) {
                set.models[name] = std::make_unique<grounding::PredicateModel>(
                    p, mixture_from(m.at("positive"), p), mixture_from(m.at("negative"), p));
            } else {
                auto kde = std::make_unique<grounding::KdeModel>(p);
                for (const char* pol : {"positive", "negative"})
                    for (const auto& z : m.at(pol).at("samples"))
                        kde->update(to_vec(z, grounding::kDim), std::string(pol) == "positive");
                set.models[name] = std::move(kde);
            }
        }
        return set;
    } catch (const grounding::ModelCorruptError&) {
        throw;
    } catch (const std::exception& e) {
        throw grounding::ModelCorruptError(std::string("malformed model: ") + e.what());
    }
}

json plan_to_json(const Plan& plan) {
    json steps = json::array();
    for (std::size_t i = 0; i < plan.actions.size(); ++i)
        steps.push_back({{"step", i + 1}, {"action", plan.actions[i].name}, {"args", plan.actions[i].args}});
    return {{"schema", kPlanSchema}, {"length", plan.size()}, {"steps", steps}};
}

json validation_to_json(const planner::ValidationReport& v, const domains::ConsistencyReport& c) {
    auto atoms = [](const std::vector<Atom>& as) {
        json a = json::array();
        for (const auto& x : as) a.push_back(atom_json(x));
        return a;
    };
    json violations = json::array();
    for (const auto& x : c.violations)
        violations.push_back({{"step", x.step + 1}, {"rule", std::string(1, x.rule)}, {"message", x.message}});
    json out = {{"schema", kValidationSchema},
                {"valid", v.valid},
                {"message", v.message},
                {"missing", atoms(v.missing)},
                {"violating", atoms(v.violating)},
                {"unmet_goals", atoms(v.unmet_goals)},
                {"consistent", c.ok()},
                {"violations", violations}};
    out["failed_step"] = v.failed_step ? json(*v.failed_step + 1) : json(nullptr);
    return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::string schema, std::vector<std::string> columns)
    : out_(out), schema_(std::move(schema)), width_(columns.size()) {
    out_ << "schema";
    for (const auto& c : columns) out_ << ',' << c;
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                                            std::to_string(width_));
    out_ << schema_;
    for (const auto& c : cells) out_ << ',' << c;
    out_ << '\n';
}

}  // namespace ocplan::io
