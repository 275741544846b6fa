// Copyright 2026 The nmrqcels Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nmrqcels/kernels.hpp"

namespace nmrqcels {

using cplx = std::complex<double>;

/// Dense matrices are an oracle path only; registers above this size are
/// rejected by every dense routine.
inline constexpr std::size_t kDenseQubitLimit = 12;

/// Proton gyromagnetic ratio, Hz per tesla.
inline constexpr double kProtonGyromagneticHzPerTesla = 42.577e6;

enum class Pauli : std::uint8_t { I, X, Y, Z };

char to_char(Pauli p);

/// Tensor product of single-qubit Paulis with a real weight. Letter k acts
/// on qubit k, which is bit k of a basis-state index.
class PauliString {
  public:
    PauliString() = default;

    /// `letters` over {I, X, Y, Z}. The all-identity string is rejected
    /// unless `allow_identity` is set.
    PauliString(std::string_view letters, double coefficient,
                bool allow_identity = false);

    static PauliString single(std::size_t n_qubits, std::size_t qubit,
                              Pauli p, double coefficient);
    static PauliString two_body(std::size_t n_qubits, std::size_t i,
                                std::size_t j, Pauli p, double coefficient);

    [[nodiscard]] std::size_t size() const { return letters_.size(); }
    [[nodiscard]] Pauli operator[](std::size_t k) const { return letters_[k]; }
    [[nodiscard]] const std::vector<Pauli> &letters() const { return letters_; }
    [[nodiscard]] std::string label() const;
    [[nodiscard]] double coefficient() const { return coefficient_; }
    [[nodiscard]] kernels::PauliMask mask() const { return mask_; }
    [[nodiscard]] bool is_identity() const {
        return mask_.x == 0 && mask_.z == 0;
    }

    [[nodiscard]] PauliString with_coefficient(double c) const {
        PauliString out = *this;
        out.coefficient_ = c;
        return out;
    }

    /// True when the two strings commute as operators (coefficients ignored).
    [[nodiscard]] bool commutes_with(const PauliString &other) const;

  private:
    std::vector<Pauli> letters_;
    double coefficient_ = 0.0;
    kernels::PauliMask mask_{};
};

/// Weighted sum of Pauli strings on a fixed register. Terms with the same
/// letters are merged on insertion; insertion order of first appearance is
/// preserved and is the term order product formulas use.
class PauliSum {
  public:
    PauliSum() = default;
    explicit PauliSum(std::size_t register_size) : register_size_(register_size) {}

    void add(const PauliString &term);

    [[nodiscard]] std::size_t register_size() const { return register_size_; }
    [[nodiscard]] const std::vector<PauliString> &terms() const { return terms_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

    /// Sum of |coefficient| over all terms.
    [[nodiscard]] double one_norm() const;

    [[nodiscard]] auto begin() const { return terms_.begin(); }
    [[nodiscard]] auto end() const { return terms_.end(); }

  private:
    std::size_t register_size_ = 0;
    std::vector<PauliString> terms_;
};

/// Which interaction terms build_nmr_hamiltonian emits. The partial forms
/// exist for the high-field and ZZ-splitting closed forms.
enum class Interaction { full, zz_only, z_only };

Interaction interaction_from_string(std::string_view name);
std::string to_string(Interaction interaction);

struct SpinSystemSpec {
    std::size_t n_spins = 0;
    std::vector<double> delta_ppm;
    /// (i, j) with i < j -> J_ij in Hz.
    std::map<std::pair<std::size_t, std::size_t>, double> couplings;
    double reference_freq_hz = 0.0;
    double rescale = 1.0;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Stable hex digest of the canonical parameter list.
    [[nodiscard]] std::string fingerprint() const;
};

/// Spectrometer reference frequency for a field strength in tesla.
double reference_freq_from_field(double tesla);

/// Chemical shift in ppm to the internal angular unit (rad/s, rescaled).
double ppm_to_angular(double ppm, const SpinSystemSpec &spec);
double angular_to_ppm(double theta, const SpinSystemSpec &spec);
/// Coupling constant in Hz to the internal angular unit.
double hz_to_angular(double hz, const SpinSystemSpec &spec);
/// Internal angular frequency to physical Hz (rescale undone).
double angular_to_hz(double theta, const SpinSystemSpec &spec);

std::vector<double> centers_to_ppm(const std::vector<double> &theta,
                                   const SpinSystemSpec &spec);

PauliSum build_nmr_hamiltonian(const SpinSystemSpec &spec,
                               Interaction interaction = Interaction::full);

/// (M_x, M_y) with M_x = 1/2 sum_k X_k and M_y = 1/2 sum_k Y_k.
std::pair<PauliSum, PauliSum> build_magnetization(const SpinSystemSpec &spec);

Eigen::MatrixXcd pauli_string_to_dense(const PauliString &term);
Eigen::MatrixXcd pauli_sum_to_dense(const PauliSum &sum,
                                    std::size_t qubit_limit = kDenseQubitLimit);

} // namespace nmrqcels
