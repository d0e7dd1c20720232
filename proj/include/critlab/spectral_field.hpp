#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "critlab/fft.hpp"
#include "critlab/grid.hpp"

namespace critlab {

using complex = std::complex<double>;

/// Fourier coefficients c(xi) of a real periodic field with m components,
/// normalized so that f(x) = sum_xi c(xi) exp(i xi.x).
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(Grid grid, int components)
        : grid_(std::move(grid)), components_(components),
          coeffs_(static_cast<std::size_t>(components) * grid_.size()) {
        if (components < 1) throw InvalidArgument("spectral field: components must be >= 1");
    }

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t modes() const { return grid_.size(); }

    std::span<complex> component(int c) {
        return {coeffs_.data() + static_cast<std::size_t>(c) * modes(), modes()};
    }
    std::span<const complex> component(int c) const {
        return {coeffs_.data() + static_cast<std::size_t>(c) * modes(), modes()};
    }
    complex& at(int c, std::size_t mode) { return coeffs_[static_cast<std::size_t>(c) * modes() + mode]; }
    const complex& at(int c, std::size_t mode) const {
        return coeffs_[static_cast<std::size_t>(c) * modes() + mode];
    }

    std::vector<complex>& data() { return coeffs_; }
    const std::vector<complex>& data() const { return coeffs_; }

    SpectralField& operator+=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& c : coeffs_) c *= a;
        return *this;
    }
    /// this += a * o
    SpectralField& axpy(double a, const SpectralField& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * o.coeffs_[i];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void check_compatible(const SpectralField& o) const {
        if (!(grid_ == o.grid_)) throw InvalidArgument("spectral field: grid mismatch");
        if (components_ != o.components_) throw InvalidArgument("spectral field: component mismatch");
    }

private:
    Grid grid_;
    int components_ = 0;
    std::vector<complex> coeffs_;
};

/// Collocation values of a real field on the uniform grid.
class PhysicalField {
public:
    PhysicalField() = default;
    PhysicalField(Grid grid, int components)
        : grid_(std::move(grid)), components_(components),
          values_(static_cast<std::size_t>(components) * grid_.size()) {}

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t points() const { return grid_.size(); }

    std::span<double> component(int c) {
        return {values_.data() + static_cast<std::size_t>(c) * points(), points()};
    }
    std::span<const double> component(int c) const {
        return {values_.data() + static_cast<std::size_t>(c) * points(), points()};
    }
    double& at(int c, std::size_t p) { return values_[static_cast<std::size_t>(c) * points() + p]; }
    double at(int c, std::size_t p) const { return values_[static_cast<std::size_t>(c) * points() + p]; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

private:
    Grid grid_;
    int components_ = 0;
    std::vector<double> values_;
};

inline PhysicalField to_physical(const SpectralField& f) {
    const Grid& g = f.grid();
    PhysicalField out(g, f.components());
    std::vector<complex> buf(g.size());
    for (int c = 0; c < f.components(); ++c) {
        fft::backward(g, f.component(c).data(), buf.data());
        auto dst = out.component(c);
        for (std::size_t p = 0; p < g.size(); ++p) dst[p] = buf[p].real();
    }
    return out;
}

inline SpectralField to_spectral(const PhysicalField& f) {
    const Grid& g = f.grid();
    SpectralField out(g, f.components());
    std::vector<complex> buf(g.size());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (int c = 0; c < f.components(); ++c) {
        auto src = f.component(c);
        for (std::size_t p = 0; p < g.size(); ++p) buf[p] = complex(src[p], 0.0);
        auto dst = out.component(c);
        fft::forward(g, buf.data(), dst.data());
        for (auto& v : dst) v *= scale;
    }
    return out;
}

/// Zero every coefficient outside the retained (dealiased) region. Idempotent.
inline SpectralField dealias(SpectralField f) {
    const Grid& g = f.grid();
    for (int c = 0; c < f.components(); ++c) {
        auto comp = f.component(c);
        for (std::size_t m = 0; m < g.size(); ++m)
            if (!g.retained(m)) comp[m] = 0.0;
    }
    return f;
}

/// Forward transform followed by dealiasing: the standard exit path of a
/// physical-space product.
inline SpectralField to_spectral_dealiased(const PhysicalField& f) { return dealias(to_spectral(f)); }

inline SpectralField zeros_like(const SpectralField& f) { return SpectralField(f.grid(), f.components()); }

/// Select one component as a scalar field.
inline SpectralField component_of(const SpectralField& f, int c) {
    SpectralField out(f.grid(), 1);
    std::ranges::copy(f.component(c), out.component(0).begin());
    return out;
}

/// Mean value of each component (the zero mode).
inline double mean(const SpectralField& f, int c = 0) { return f.at(c, 0).real(); }

/// Largest coefficient magnitude, over all components.
inline double max_abs_coeff(const SpectralField& f) {
    double m = 0.0;
    for (const auto& c : f.data()) m = std::max(m, std::abs(c));
    return m;
}

/// Largest violation of c(-xi) = conj(c(xi)).
inline double conjugate_symmetry_defect(const SpectralField& f) {
    const Grid& g = f.grid();
    double worst = 0.0;
    for (int c = 0; c < f.components(); ++c)
        for (std::size_t m = 0; m < g.size(); ++m) {
            std::size_t mc = g.conjugate_mode(m);
            worst = std::max(worst, std::abs(f.at(c, m) - std::conj(f.at(c, mc))));
        }
    return worst;
}

/// Sample a callable f(x) (x as a vector of coordinates) into one component.
template <class F>
PhysicalField sample(const Grid& g, int components, F&& fn) {
    PhysicalField out(g, components);
    std::vector<double> x(g.dim());
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (int a = 0; a < g.dim(); ++a) x[a] = g.coordinate(p, a);
        for (int c = 0; c < components; ++c) out.at(c, p) = fn(x, c);
    }
    return out;
}

}  // namespace critlab
