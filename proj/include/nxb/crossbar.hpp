#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "nxb/device.hpp"

namespace nxb {

// Accumulated read energy plus per-cell read counters (the alpha_t weights
// used by the energy regularizer). Mergeable by addition.
struct EnergyLedger {
    double total_energy = 0.0;
    std::vector<std::uint64_t> read_counts;

    void resize_cells(std::size_t n) {
        if (read_counts.size() != n) read_counts.assign(n, 0);
    }

    std::uint64_t total_reads() const {
        std::uint64_t n = 0;
        for (auto c : read_counts) n += c;
        return n;
    }

    void merge(const EnergyLedger& other) {
        total_energy += other.total_energy;
        if (read_counts.size() < other.read_counts.size())
            read_counts.resize(other.read_counts.size(), 0);
        for (std::size_t i = 0; i < other.read_counts.size(); ++i)
            read_counts[i] += other.read_counts[i];
    }
};

// Binary expansion of a quantized input vector: plane p holds the p-th bit
// of every entry, so sum_p delta_p * 2^p reconstructs the input exactly.
struct BitPlanes {
    int bits = 0;
    std::size_t n = 0;
    std::vector<std::uint8_t> delta;  // [bits][n], plane-major

    std::uint8_t at(int p, std::size_t k) const { return delta[static_cast<std::size_t>(p) * n + k]; }
};

inline BitPlanes decompose(const std::vector<std::uint32_t>& x_quantized, int bits) {
    if (bits < 1 || bits > 31) throw std::invalid_argument("decompose: bits must be in [1,31]");
    const std::uint32_t limit = 1u << bits;
    BitPlanes bp;
    bp.bits = bits;
    bp.n = x_quantized.size();
    bp.delta.assign(static_cast<std::size_t>(bits) * bp.n, 0);
    for (std::size_t k = 0; k < bp.n; ++k) {
        if (x_quantized[k] >= limit)
            throw std::domain_error("decompose: entry exceeds 2^bits - 1");
        for (int p = 0; p < bits; ++p)
            bp.delta[static_cast<std::size_t>(p) * bp.n + k] =
                static_cast<std::uint8_t>((x_quantized[k] >> p) & 1u);
    }
    return bp;
}

// A programmed weight matrix with its bias, per-crossbar energy coefficient
// and quantization metadata. Immutable during MAC execution.
struct Crossbar {
    std::size_t rows = 0, cols = 0;
    std::vector<double> weights;  // row-major, values on the quantization grid
    std::vector<double> bias;     // length rows; deterministic, not metered
    EnergyCoefficient rho;
    int weight_bits = 8;
    double weight_scale = 1.0;

    double w(std::size_t i, std::size_t k) const { return weights[i * cols + k]; }
    std::size_t cells() const { return rows * cols; }
};

// Symmetric linear quantization: scale = max|w| / (2^(bits-1) - 1), stored
// values are the dequantized grid points. All-zero input pins scale to 1.
inline void reprogram(Crossbar& xb, const std::vector<double>& weights_float,
                      const std::vector<double>& bias) {
    if (weights_float.size() != xb.cells())
        throw std::invalid_argument("program: weight matrix size mismatch");
    if (bias.size() != xb.rows) throw std::invalid_argument("program: bias size mismatch");
    const double qmax = static_cast<double>((1 << (xb.weight_bits - 1)) - 1);
    double maxabs = 0.0;
    for (double v : weights_float) {
        if (!std::isfinite(v)) throw std::invalid_argument("program: weights must be finite");
        maxabs = std::max(maxabs, std::abs(v));
    }
    xb.weight_scale = maxabs > 0.0 ? maxabs / qmax : 1.0;
    xb.weights.resize(weights_float.size());
    for (std::size_t i = 0; i < weights_float.size(); ++i) {
        double q = std::round(weights_float[i] / xb.weight_scale);
        q = std::min(std::max(q, -qmax), qmax);
        xb.weights[i] = q * xb.weight_scale;
    }
    xb.bias = bias;
}

inline Crossbar program(const std::vector<double>& weights_float, std::size_t rows,
                        std::size_t cols, const std::vector<double>& bias, int weight_bits,
                        EnergyCoefficient rho) {
    if (weight_bits < 2) throw std::invalid_argument("program: weight_bits must be >= 2");
    Crossbar xb;
    xb.rows = rows;
    xb.cols = cols;
    xb.weight_bits = weight_bits;
    xb.rho = rho;
    reprogram(xb, weights_float, bias);
    return xb;
}

namespace detail {

inline void check_mac_shapes(const Crossbar& xb, std::size_t drive_len, const EnergyLedger& ledger) {
    if (drive_len != xb.cols) throw std::invalid_argument("mac: drive length != crossbar cols");
    if (!ledger.read_counts.empty() && ledger.read_counts.size() != xb.cells())
        throw std::invalid_argument("mac: ledger cell count mismatch");
}

}  // namespace detail

// Noise-free MAC at the same drive convention; meters the ledger exactly as
// a single analog read per cell would.
inline std::vector<double> mac_ideal(const DeviceModel& model, const Crossbar& xb,
                                     const std::vector<double>& drive, EnergyLedger& ledger,
                                     double out_scale = 1.0) {
    detail::check_mac_shapes(xb, drive.size(), ledger);
    ledger.resize_cells(xb.cells());
    std::vector<double> y(xb.rows);
    const double rho = xb.rho.rho();
    double energy = 0.0;
    for (std::size_t k = 0; k < xb.cols; ++k) {
        if (drive[k] < 0.0) throw std::domain_error("mac: drive must be >= 0");
    }
    for (std::size_t i = 0; i < xb.rows; ++i) {
        double acc = 0.0;
        const double* wrow = xb.weights.data() + i * xb.cols;
        for (std::size_t k = 0; k < xb.cols; ++k) {
            acc += wrow[k] * drive[k];
            energy += rho * std::abs(wrow[k]) * drive[k] + model.peripheral_energy;
            ledger.read_counts[i * xb.cols + k] += 1;
        }
        y[i] = out_scale * acc + xb.bias[i];
    }
    ledger.total_energy += energy;
    return y;
}

// Original computation: one read per cell at the full drive level. The
// sampled state of cell (i,k) perturbs its weight multiplicatively.
inline std::vector<double> mac_original(const DeviceModel& model, const Crossbar& xb,
                                        const std::vector<double>& drive,
                                        const StateTensor& states, EnergyLedger& ledger,
                                        double out_scale = 1.0) {
    detail::check_mac_shapes(xb, drive.size(), ledger);
    if (states.size() != xb.cells())
        throw std::invalid_argument("mac_original: states do not cover every cell");
    ledger.resize_cells(xb.cells());
    for (std::size_t k = 0; k < xb.cols; ++k) {
        if (drive[k] < 0.0) throw std::domain_error("mac_original: drive must be >= 0");
    }
    const double rho = xb.rho.rho();
    const double amp = amplitude(model, rho);
    std::vector<double> y(xb.rows);
    double energy = 0.0;
    for (std::size_t i = 0; i < xb.rows; ++i) {
        double acc = 0.0;
        const double* wrow = xb.weights.data() + i * xb.cols;
        const std::uint8_t* srow = states.states.data() + i * xb.cols;
        for (std::size_t k = 0; k < xb.cols; ++k) {
            // (1 + u*A) * drive collapses bitwise to the ideal kernel at kappa = 0
            acc += wrow[k] * ((1.0 + model.deviations[srow[k]] * amp) * drive[k]);
            energy += rho * std::abs(wrow[k]) * drive[k] + model.peripheral_energy;
            ledger.read_counts[i * xb.cols + k] += 1;
        }
        y[i] = out_scale * acc + xb.bias[i];
    }
    ledger.total_energy += energy;
    return y;
}

// Low-fluctuation decomposed computation: one binary read per set bit plane,
// each with an independent state sample, results accumulated with 2^p.
inline std::vector<double> mac_decomposed(const DeviceModel& model, const Crossbar& xb,
                                          const BitPlanes& planes,
                                          const std::vector<StateTensor>& states_per_plane,
                                          EnergyLedger& ledger, double out_scale = 1.0) {
    detail::check_mac_shapes(xb, planes.n, ledger);
    if (states_per_plane.size() != static_cast<std::size_t>(planes.bits))
        throw std::invalid_argument("mac_decomposed: plane/state count mismatch");
    for (const auto& st : states_per_plane) {
        if (st.size() != xb.cells())
            throw std::invalid_argument("mac_decomposed: states do not cover every cell");
    }
    ledger.resize_cells(xb.cells());
    const double rho = xb.rho.rho();
    const double amp = amplitude(model, rho);
    std::vector<double> y(xb.rows);
    double energy = 0.0;
    for (std::size_t i = 0; i < xb.rows; ++i) {
        double acc = 0.0;
        const double* wrow = xb.weights.data() + i * xb.cols;
        for (std::size_t k = 0; k < xb.cols; ++k) {
            // per-cell accumulation over planes keeps the kappa = 0 result
            // bitwise identical to a single read at the full drive
            double c = 0.0;
            for (int p = 0; p < planes.bits; ++p) {
                if (planes.at(p, k)) {
                    const std::uint8_t l = states_per_plane[static_cast<std::size_t>(p)]
                                               .states[i * xb.cols + k];
                    c += static_cast<double>(1u << p) * (1.0 + model.deviations[l] * amp);
                    energy += rho * std::abs(wrow[k]);
                }
                energy += model.peripheral_energy;
                ledger.read_counts[i * xb.cols + k] += 1;
            }
            acc += wrow[k] * c;
        }
        y[i] = out_scale * acc + xb.bias[i];
    }
    ledger.total_energy += energy;
    return y;
}

inline void to_json(nlohmann::json& j, const Crossbar& xb) {
    std::vector<std::int64_t> q(xb.weights.size());
    for (std::size_t i = 0; i < xb.weights.size(); ++i)
        q[i] = static_cast<std::int64_t>(std::llround(xb.weights[i] / xb.weight_scale));
    j = nlohmann::json{{"rows", xb.rows},
                       {"cols", xb.cols},
                       {"weight_bits", xb.weight_bits},
                       {"weight_scale", xb.weight_scale},
                       {"q", q},
                       {"bias", xb.bias},
                       {"theta", xb.rho.theta}};
}

inline void from_json(const nlohmann::json& j, Crossbar& xb) {
    j.at("rows").get_to(xb.rows);
    j.at("cols").get_to(xb.cols);
    j.at("weight_bits").get_to(xb.weight_bits);
    j.at("weight_scale").get_to(xb.weight_scale);
    j.at("bias").get_to(xb.bias);
    xb.rho.theta = j.at("theta").get<double>();
    const auto q = j.at("q").get<std::vector<std::int64_t>>();
    if (q.size() != xb.rows * xb.cols)
        throw std::invalid_argument("crossbar: weight grid size mismatch");
    if (xb.bias.size() != xb.rows) throw std::invalid_argument("crossbar: bias size mismatch");
    xb.weights.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        xb.weights[i] = static_cast<double>(q[i]) * xb.weight_scale;
}

}  // namespace nxb
