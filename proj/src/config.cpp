#include "rydecay/config.hpp"

#include <fstream>
#include <stdexcept>

namespace rydecay {

using nlohmann::json;

void RunConfig::validate() const {
    (void)lattice();
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (!(t_max >= 0.0) || t_points < 1) throw std::invalid_argument("invalid time grid");
    if (delta_points < 1 || omega_points < 1 || cut_points < 1) throw std::invalid_argument("grid sizes must be >= 1");
    if (delta_max < delta_min || omega_max < omega_min) throw std::invalid_argument("grid bounds are reversed");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (seed_grid < 1) throw std::invalid_argument("seed_grid must be >= 1");
    if (cross_check_sites < 0) throw std::invalid_argument("cross_check_sites must be >= 0");
    if (models.empty()) throw std::invalid_argument("at least one decay model is required");
    (void)decay_models();
    (void)decay_model_from_string(mf_model);
    (void)sign_convention_from_string(sign_convention);
}

LatticeSpec RunConfig::lattice() const { return build_lattice(dimension, extents, boundary_from_string(boundary)); }

ModelParams RunConfig::model_params(double Delta, double Omega) const {
    ModelParams p;
    p.omega_a = omega_a;
    p.V = V;
    p.gamma = gamma;
    p.Omega = Omega;
    p.Delta = Delta;
    return p;
}

MeanFieldParams RunConfig::meanfield_params(double Delta, double Omega) const {
    MeanFieldParams p;
    p.Delta = Delta;
    p.Omega = Omega;
    p.gamma = gamma;
    p.V = V;
    p.d = d;
    p.model = decay_model_from_string(mf_model);
    p.sign = sign_convention_from_string(sign_convention);
    return p;
}

std::vector<double> RunConfig::delta_grid() const { return linspace(delta_min, delta_max, delta_points); }
std::vector<double> RunConfig::omega_grid() const { return linspace(omega_min, omega_max, omega_points); }

std::vector<DecayModel> RunConfig::decay_models() const {
    std::vector<DecayModel> out;
    for (const auto& m : models) {
        if (m == "both") {
            out = {DecayModel::single, DecayModel::collective};
            break;
        }
        out.push_back(decay_model_from_string(m));
    }
    return out;
}

#define RYDECAY_CONFIG_FIELDS(X)                                                                              \
    X(dimension) X(extents) X(boundary) X(gamma) X(V) X(omega_a) X(models) X(d) X(t_max) X(t_points)          \
        X(cross_check_sites) X(delta_min) X(delta_max) X(delta_points) X(omega_min) X(omega_max) X(omega_points) \
            X(dt) X(n_traj) X(seed) X(mf_model) X(sign_convention) X(cut_omega) X(cut_points) X(seed_grid)      \
                X(threads) X(out)

void to_json(json& j, const RunConfig& c) {
    j = json::object();
#define X(name) j[#name] = c.name;
    RYDECAY_CONFIG_FIELDS(X)
#undef X
}

void from_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
#define X(name)                      \
    if (key == #name) {              \
        value.get_to(c.name);        \
        known = true;                \
    }
        RYDECAY_CONFIG_FIELDS(X)
#undef X
        if (!known) throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

RunConfig merge_config(const RunConfig& base, const json& overrides) {
    RunConfig out = base;
    from_json(overrides, out);
    return out;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("cannot parse config '" + path + "': " + e.what());
    }
    if (j.is_object() && j.contains("config")) j = j.at("config");
    return merge_config(base, j);
}

json parse_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    return json{{key, value}};
}

}  // namespace rydecay
