// fock.hpp — Tensor-product bases, coherent states and index arithmetic

#pragma once

#include "fluor/types.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fluor {

struct ModelSpec;

enum class Factor { Electron, Position, Pump, Fluorescence };

std::string to_string(Factor f);

// Ordered product basis. Factor order is always
// (electron, position?, pump?, fluorescence?); the last factor varies fastest.
class BasisLayout {
public:
    struct Entry {
        Factor label;
        std::size_t dim;
    };

    BasisLayout() = default;
    explicit BasisLayout(std::vector<Entry> factors);

    std::size_t total_dim() const noexcept { return total_; }
    const std::vector<Entry>& factors() const noexcept { return factors_; }

    bool has(Factor f) const noexcept;
    // Position of a factor in the ordered list; throws if absent.
    std::size_t slot(Factor f) const;
    std::size_t dim(Factor f) const;   // 1 when the factor is absent
    std::size_t stride(Factor f) const;

    std::size_t flat(const std::vector<std::size_t>& multi) const;
    std::vector<std::size_t> multi(std::size_t flat) const;
    // Single-factor digit of a flat index (0 if the factor is absent).
    std::size_t digit(std::size_t flat, Factor f) const;

    bool operator==(const BasisLayout& other) const;

private:
    std::vector<Entry> factors_;
    std::vector<std::size_t> strides_;
    std::size_t total_{1};
};

struct CoherentSpec {
    double alpha{0.0};
    int n_max{0};
};

// Smallest cutoff accepted without override: ceil(|alpha|^2 + 8|alpha|).
int minimal_cutoff(double alpha);

struct CoherentAmplitudes {
    RVector amplitudes;     // renormalized, length n_max + 1
    double captured_norm2;  // sum |c_n|^2 before renormalization
};

// c_n = exp(-|a|^2/2) a^n / sqrt(n!), accumulated in log space.
CoherentAmplitudes coherent_state(const CoherentSpec& spec);

struct StateVector {
    BasisLayout layout;
    CVector amplitudes;

    double norm() const { return amplitudes.norm(); }
};

BasisLayout build_basis(const ModelSpec& model);

// Ground electron level, coherent pump, fluorescence vacuum, and for the
// moving atom a Gaussian wavepacket on the interior grid.
StateVector initial_state(const ModelSpec& model);

// Normalized wavepacket phi(x) ~ exp(-(x-x0)^2/sigma^2) exp(i p0 x) sampled on
// the grid, together with the |phi|^2 mass lying outside [0, L] before
// truncation.
struct Wavepacket {
    CVector values;
    double outside_mass;
};
Wavepacket gaussian_wavepacket(const ModelSpec& model);

} // namespace fluor
