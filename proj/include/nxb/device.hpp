#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nxb/rng.hpp"

namespace nxb {

// Which state each cell occupied during one read event. Logically one-hot
// per position; stored as the active index.
struct StateTensor {
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> states;

    std::size_t size() const { return states.size(); }

    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

// Stochastic cell model: m discrete fluctuation states with probabilities
// p_l and unit deviations u_l. A read in state l returns w * (1 + u_l * kappa/rho),
// so larger rho buys stability at higher read energy.
struct DeviceModel {
    std::size_t m = 2;
    std::vector<double> probs = {0.5, 0.5};
    std::vector<double> deviations = {-1.0, 1.0};
    double kappa = 0.1;
    double peripheral_energy = 0.0;

    void validate() const {
        if (m < 1) throw std::invalid_argument("device: m must be >= 1");
        if (probs.size() != m || deviations.size() != m)
            throw std::invalid_argument("device: probs/deviations must have length m");
        double psum = 0.0, mean_dev = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            if (probs[l] < 0.0 || probs[l] > 1.0)
                throw std::invalid_argument("device: state probability outside [0,1]");
            psum += probs[l];
            mean_dev += probs[l] * deviations[l];
        }
        if (std::abs(psum - 1.0) > 1e-12)
            throw std::invalid_argument("device: state probabilities must sum to 1");
        if (std::abs(mean_dev) > 1e-12)
            throw std::invalid_argument("device: deviations must be zero-mean under probs");
        if (kappa < 0.0) throw std::invalid_argument("device: kappa must be >= 0");
        if (peripheral_energy < 0.0)
            throw std::invalid_argument("device: peripheral_energy must be >= 0");
    }

    static DeviceModel two_state(double kappa, double peripheral_energy = 0.0) {
        DeviceModel d;
        d.kappa = kappa;
        d.peripheral_energy = peripheral_energy;
        d.validate();
        return d;
    }

    // m states with unit deviations evenly spanning [-1, +1], uniform probs.
    // Symmetric spacing keeps the read unbiased.
    static DeviceModel multi_state(std::size_t m, double kappa, double peripheral_energy = 0.0) {
        DeviceModel d;
        d.m = m;
        d.probs.assign(m, 1.0 / static_cast<double>(m));
        d.deviations.resize(m);
        if (m == 1) {
            d.deviations[0] = 0.0;
        } else {
            for (std::size_t l = 0; l < m; ++l)
                d.deviations[l] = -1.0 + 2.0 * static_cast<double>(l) / static_cast<double>(m - 1);
        }
        d.kappa = kappa;
        d.peripheral_energy = peripheral_energy;
        d.validate();
        return d;
    }

    static double preset_kappa(std::string_view name) {
        if (name == "weak") return 0.05;
        if (name == "normal") return 0.10;
        if (name == "strong") return 0.20;
        throw std::invalid_argument("device: unknown intensity preset '" + std::string(name) +
                                    "' (expected weak|normal|strong)");
    }

    static DeviceModel preset(std::string_view name) { return two_state(preset_kappa(name)); }
};

// Fluctuation amplitude A(rho) = kappa / rho: more read energy, less spread.
inline double amplitude(const DeviceModel& model, double rho) {
    if (!(rho > 0.0)) throw std::domain_error("amplitude: rho must be > 0");
    return model.kappa / rho;
}

// r_l(w, rho): the value retrieved from a cell storing w when read in state l.
inline double effective_weight(const DeviceModel& model, double w, double rho, std::size_t l) {
    if (l >= model.m) throw std::out_of_range("effective_weight: state index out of range");
    return w * (1.0 + model.deviations[l] * amplitude(model, rho));
}

// Energy of one read: rho * |w| * drive + peripheral overhead. The drive is
// the analog input level in quantization-step units.
inline double read_energy(const DeviceModel& model, double rho, double w, double drive) {
    if (!(rho > 0.0)) throw std::domain_error("read_energy: rho must be > 0");
    if (drive < 0.0) throw std::domain_error("read_energy: drive must be >= 0");
    return rho * std::abs(w) * drive + model.peripheral_energy;
}

inline std::uint8_t sample_state(const DeviceModel& model, Rng& rng) {
    if (model.m == 1) return 0;
    double r = rng.next_double();
    double acc = 0.0;
    for (std::size_t l = 0; l + 1 < model.m; ++l) {
        acc += model.probs[l];
        if (r < acc) return static_cast<std::uint8_t>(l);
    }
    return static_cast<std::uint8_t>(model.m - 1);
}

inline void sample_states_into(const DeviceModel& model, std::uint8_t* dst, std::size_t n,
                               Rng& rng) {
    if (model.m == 1) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = 0;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) dst[i] = sample_state(model, rng);
}

// One independent draw per cell position; the stochastic half of a read.
inline StateTensor sample_states(const DeviceModel& model, std::vector<std::size_t> shape,
                                 Rng& rng) {
    if (shape.empty()) throw std::invalid_argument("sample_states: shape must be non-empty");
    StateTensor st;
    st.shape = std::move(shape);
    st.states.resize(StateTensor::element_count(st.shape));
    sample_states_into(model, st.states.data(), st.states.size(), rng);
    return st;
}

// Trainable energy coefficient, rho = exp(theta) so optimizers search theta
// unconstrained while rho stays positive.
struct EnergyCoefficient {
    double theta = 0.0;

    double rho() const { return std::exp(theta); }

    static EnergyCoefficient from_rho(double rho) {
        if (!(rho > 0.0)) throw std::invalid_argument("EnergyCoefficient: rho must be > 0");
        return EnergyCoefficient{std::log(rho)};
    }
};

inline void to_json(nlohmann::json& j, const DeviceModel& d) {
    j = nlohmann::json{{"m", d.m},
                       {"probs", d.probs},
                       {"deviations", d.deviations},
                       {"kappa", d.kappa},
                       {"peripheral_energy", d.peripheral_energy}};
}

inline void from_json(const nlohmann::json& j, DeviceModel& d) {
    j.at("m").get_to(d.m);
    j.at("probs").get_to(d.probs);
    j.at("deviations").get_to(d.deviations);
    j.at("kappa").get_to(d.kappa);
    d.peripheral_energy = j.value("peripheral_energy", 0.0);
    d.validate();
}

}  // namespace nxb
