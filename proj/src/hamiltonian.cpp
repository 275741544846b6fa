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
#include "nmrqcels/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "nmrqcels/error.hpp"

namespace nmrqcels {

namespace {

Pauli pauli_from_char(char c) {
    switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: break;
    }
    throw ConfigError(std::string("invalid Pauli letter '") + c + "'");
}

kernels::PauliMask mask_of(const std::vector<Pauli> &letters) {
    if (letters.size() > 64)
        throw DimensionError("Pauli strings are limited to 64 qubits");
    kernels::PauliMask m;
    for (std::size_t k = 0; k < letters.size(); ++k) {
        const std::uint64_t bit = std::uint64_t{1} << k;
        switch (letters[k]) {
        case Pauli::X: m.x |= bit; break;
        case Pauli::Y: m.x |= bit; m.z |= bit; ++m.num_y; break;
        case Pauli::Z: m.z |= bit; break;
        case Pauli::I: break;
        }
    }
    return m;
}

// FNV-1a over the bytes of a string.
std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

char to_char(Pauli p) {
    constexpr char table[] = {'I', 'X', 'Y', 'Z'};
    return table[static_cast<int>(p)];
}

PauliString::PauliString(std::string_view letters, double coefficient,
                         bool allow_identity)
    : coefficient_(coefficient) {
    if (letters.empty())
        throw DimensionError("Pauli string must act on at least one qubit");
    letters_.reserve(letters.size());
    for (char c : letters)
        letters_.push_back(pauli_from_char(c));
    mask_ = mask_of(letters_);
    if (!allow_identity && is_identity())
        throw ConfigError("identity Pauli string requires allow_identity");
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t qubit,
                                Pauli p, double coefficient) {
    if (qubit >= n_qubits)
        throw DimensionError("qubit index " + std::to_string(qubit) +
                             " out of range for register of " +
                             std::to_string(n_qubits));
    std::string s(n_qubits, 'I');
    s[qubit] = to_char(p);
    return PauliString(s, coefficient);
}

PauliString PauliString::two_body(std::size_t n_qubits, std::size_t i,
                                  std::size_t j, Pauli p, double coefficient) {
    if (i >= n_qubits || j >= n_qubits || i == j)
        throw DimensionError("invalid qubit pair (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
    std::string s(n_qubits, 'I');
    s[i] = to_char(p);
    s[j] = to_char(p);
    return PauliString(s, coefficient);
}

std::string PauliString::label() const {
    std::string s;
    s.reserve(letters_.size());
    for (Pauli p : letters_)
        s.push_back(to_char(p));
    return s;
}

bool PauliString::commutes_with(const PauliString &other) const {
    const auto a = mask_, b = other.mask_;
    const int anti = std::popcount((a.x & b.z) ^ (a.z & b.x));
    return (anti & 1) == 0;
}

void PauliSum::add(const PauliString &term) {
    if (register_size_ == 0)
        register_size_ = term.size();
    if (term.size() != register_size_)
        throw DimensionError("term " + term.label() + " does not match register size " +
                             std::to_string(register_size_));
    for (auto &t : terms_) {
        if (t.letters() == term.letters()) {
            t = t.with_coefficient(t.coefficient() + term.coefficient());
            return;
        }
    }
    terms_.push_back(term);
}

double PauliSum::one_norm() const {
    double s = 0.0;
    for (const auto &t : terms_)
        s += std::abs(t.coefficient());
    return s;
}

Interaction interaction_from_string(std::string_view name) {
    if (name == "full") return Interaction::full;
    if (name == "zz_only") return Interaction::zz_only;
    if (name == "z_only") return Interaction::z_only;
    throw ConfigError("interaction must be one of full, zz_only, z_only; got '" +
                      std::string(name) + "'");
}

std::string to_string(Interaction interaction) {
    switch (interaction) {
    case Interaction::full: return "full";
    case Interaction::zz_only: return "zz_only";
    case Interaction::z_only: return "z_only";
    }
    return "full";
}

void SpinSystemSpec::validate() const {
    if (n_spins == 0)
        throw ConfigError("spin_system.n_spins must be positive");
    if (n_spins > 64)
        throw ConfigError("spin_system.n_spins must be at most 64");
    if (delta_ppm.size() != n_spins)
        throw ConfigError("spin_system.delta_ppm has " + std::to_string(delta_ppm.size()) +
                          " entries, expected n_spins = " + std::to_string(n_spins));
    for (std::size_t k = 0; k < delta_ppm.size(); ++k)
        if (!std::isfinite(delta_ppm[k]))
            throw ConfigError("spin_system.delta_ppm[" + std::to_string(k) + "] is not finite");
    if (!(reference_freq_hz > 0.0) || !std::isfinite(reference_freq_hz))
        throw ConfigError("spin_system.reference_freq_hz must be positive");
    if (!(rescale > 0.0) || !std::isfinite(rescale))
        throw ConfigError("spin_system.rescale must be positive");
    for (const auto &[key, j_hz] : couplings) {
        const auto [i, j] = key;
        if (!(i < j) || j >= n_spins)
            throw ConfigError("spin_system.couplings entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") needs 0 <= i < j < n_spins = " +
                              std::to_string(n_spins));
        if (!std::isfinite(j_hz))
            throw ConfigError("spin_system.couplings (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") is not finite");
    }
}

std::string SpinSystemSpec::fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << n_spins << ";nu=" << reference_freq_hz << ";rescale=" << rescale << ";d=";
    for (double d : delta_ppm)
        os << d << ',';
    os << ";J=";
    for (const auto &[key, j] : couplings)
        os << key.first << '-' << key.second << ':' << j << ',';
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

double reference_freq_from_field(double tesla) {
    if (!(tesla > 0.0))
        throw ConfigError("field strength must be positive");
    return kProtonGyromagneticHzPerTesla * tesla;
}

double ppm_to_angular(double ppm, const SpinSystemSpec &spec) {
    return 2.0 * std::numbers::pi * ppm * spec.reference_freq_hz * 1e-6 / spec.rescale;
}

double angular_to_ppm(double theta, const SpinSystemSpec &spec) {
    return theta * spec.rescale / (2.0 * std::numbers::pi * spec.reference_freq_hz * 1e-6);
}

double hz_to_angular(double hz, const SpinSystemSpec &spec) {
    return 2.0 * std::numbers::pi * hz / spec.rescale;
}

double angular_to_hz(double theta, const SpinSystemSpec &spec) {
    return theta * spec.rescale / (2.0 * std::numbers::pi);
}

std::vector<double> centers_to_ppm(const std::vector<double> &theta,
                                   const SpinSystemSpec &spec) {
    std::vector<double> out(theta.size());
    std::transform(theta.begin(), theta.end(), out.begin(),
                   [&](double t) { return angular_to_ppm(t, spec); });
    return out;
}

PauliSum build_nmr_hamiltonian(const SpinSystemSpec &spec, Interaction interaction) {
    spec.validate();
    const std::size_t n = spec.n_spins;
    PauliSum h(n);
    for (std::size_t i = 0; i < n; ++i)
        h.add(PauliString::single(n, i, Pauli::Z, ppm_to_angular(spec.delta_ppm[i], spec) / 2.0));
    if (interaction == Interaction::z_only)
        return h;
    for (const auto &[key, j_hz] : spec.couplings) {
        const double c = hz_to_angular(j_hz, spec) / 4.0;
        if (interaction == Interaction::full) {
            h.add(PauliString::two_body(n, key.first, key.second, Pauli::X, c));
            h.add(PauliString::two_body(n, key.first, key.second, Pauli::Y, c));
        }
        h.add(PauliString::two_body(n, key.first, key.second, Pauli::Z, c));
    }
    return h;
}

std::pair<PauliSum, PauliSum> build_magnetization(const SpinSystemSpec &spec) {
    spec.validate();
    const std::size_t n = spec.n_spins;
    PauliSum mx(n), my(n);
    for (std::size_t k = 0; k < n; ++k) {
        mx.add(PauliString::single(n, k, Pauli::X, 0.5));
        my.add(PauliString::single(n, k, Pauli::Y, 0.5));
    }
    return {mx, my};
}

Eigen::MatrixXcd pauli_string_to_dense(const PauliString &term) {
    const std::size_t n = term.size();
    if (n > kDenseQubitLimit)
        throw DimensionError("dense conversion limited to " + std::to_string(kDenseQubitLimit) +
                             " qubits, got " + std::to_string(n));
    const std::size_t dim = std::size_t{1} << n;
    const auto m = term.mask();
    static const cplx iphase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cplx ph = iphase[m.num_y & 3] * term.coefficient();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 0; b < dim; ++b) {
        const double sign = (std::popcount(b & m.z) & 1) ? -1.0 : 1.0;
        out(b ^ m.x, b) = ph * sign;
    }
    return out;
}

Eigen::MatrixXcd pauli_sum_to_dense(const PauliSum &sum, std::size_t qubit_limit) {
    const std::size_t n = sum.register_size();
    const std::size_t limit = std::min(qubit_limit, kDenseQubitLimit);
    if (n == 0)
        throw DimensionError("empty Pauli sum has no register");
    if (n > limit)
        throw DimensionError("dense conversion limited to " + std::to_string(limit) +
                             " qubits, got " + std::to_string(n));
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &t : sum)
        out += pauli_string_to_dense(t);
    return out;
}

} // namespace nmrqcels
