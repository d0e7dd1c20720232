#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace critlab {

/// Thrown for malformed arguments at the library boundary.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-mode wavevector tables, shared by every copy of a Grid.
struct GridTables {
    std::vector<int> index;       // integer wavenumber per axis, mode-major: index[m*dim + a]
    std::vector<double> xi;       // physical wavevector per axis, same layout
    std::vector<double> abs2;     // |xi|^2
    std::vector<double> abs;      // |xi|
    std::vector<unsigned char> retained;
};

/// Uniform periodic grid: n points per axis on a box of side box_length.
///
/// Modes are stored in FFT order per axis (0..n/2-1, -n/2..-1), row-major
/// with the first axis slowest. The Nyquist index -n/2 is never retained.
class Grid {
public:
    Grid() = default;

    int dim() const { return dim_; }
    int n() const { return n_; }
    double box_length() const { return box_length_; }
    double dealias_fraction() const { return dealias_fraction_; }

    std::size_t size() const { return size_; }
    double spacing() const { return box_length_ / n_; }
    double wavenumber_unit() const { return 2.0 * std::numbers::pi / box_length_; }
    double cell_volume() const { return std::pow(spacing(), dim_); }
    double volume() const { return std::pow(box_length_, dim_); }

    /// Largest retained |integer wavenumber| per axis.
    int cutoff_index() const { return cutoff_; }
    double cutoff_wavenumber() const { return cutoff_ * wavenumber_unit(); }

    int index(std::size_t mode, int axis) const { return tables_->index[mode * dim_ + axis]; }
    double xi(std::size_t mode, int axis) const { return tables_->xi[mode * dim_ + axis]; }
    double abs2(std::size_t mode) const { return tables_->abs2[mode]; }
    double abs(std::size_t mode) const { return tables_->abs[mode]; }
    bool retained(std::size_t mode) const { return tables_->retained[mode] != 0; }

    /// Mode holding the integer wavevector k (wrapped into FFT order).
    std::size_t mode_of(const std::vector<int>& k) const {
        std::size_t m = 0;
        for (int a = 0; a < dim_; ++a) {
            int i = ((k[a] % n_) + n_) % n_;
            m = m * n_ + static_cast<std::size_t>(i);
        }
        return m;
    }

    /// Mode holding -k for the mode holding k.
    std::size_t conjugate_mode(std::size_t mode) const {
        std::vector<int> k(dim_);
        for (int a = 0; a < dim_; ++a) k[a] = -index(mode, a);
        return mode_of(k);
    }

    /// Physical coordinate of collocation point `point` along `axis`.
    double coordinate(std::size_t point, int axis) const {
        std::size_t stride = 1;
        for (int a = dim_ - 1; a > axis; --a) stride *= n_;
        return static_cast<double>((point / stride) % n_) * spacing();
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.dim_ == b.dim_ && a.n_ == b.n_ && a.box_length_ == b.box_length_ &&
               a.dealias_fraction_ == b.dealias_fraction_;
    }

    friend Grid grid_make(int dim, int n, double box_length, double dealias_fraction);

private:
    int dim_ = 0;
    int n_ = 0;
    double box_length_ = 0.0;
    double dealias_fraction_ = 1.0;
    std::size_t size_ = 0;
    int cutoff_ = 0;
    std::shared_ptr<const GridTables> tables_;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline Grid grid_make(int dim, int n, double box_length, double dealias_fraction = 2.0 / 3.0) {
    if (dim < 1 || dim > 3) throw InvalidArgument("grid: dim must be 1, 2 or 3");
    if (!is_power_of_two(n) || n < 8) throw InvalidArgument("grid: n must be a power of two >= 8");
    if (!(box_length > 0.0)) throw InvalidArgument("grid: box length must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
        throw InvalidArgument("grid: dealias fraction must lie in (0, 1]");

    Grid g;
    g.dim_ = dim;
    g.n_ = n;
    g.box_length_ = box_length;
    g.dealias_fraction_ = dealias_fraction;
    g.size_ = 1;
    for (int a = 0; a < dim; ++a) g.size_ *= static_cast<std::size_t>(n);
    g.cutoff_ = static_cast<int>(std::floor(dealias_fraction * (n / 2) + 1e-9));

    auto t = std::make_shared<GridTables>();
    t->index.resize(g.size_ * dim);
    t->xi.resize(g.size_ * dim);
    t->abs2.resize(g.size_);
    t->abs.resize(g.size_);
    t->retained.resize(g.size_);
    const double unit = g.wavenumber_unit();
    for (std::size_t m = 0; m < g.size_; ++m) {
        std::size_t rest = m;
        double k2 = 0.0;
        bool keep = true;
        for (int a = dim - 1; a >= 0; --a) {
            int i = static_cast<int>(rest % n);
            rest /= n;
            int k = i < n / 2 ? i : i - n;
            t->index[m * dim + a] = k;
            t->xi[m * dim + a] = k * unit;
            k2 += (k * unit) * (k * unit);
            if (k == -n / 2 || std::abs(k) > g.cutoff_) keep = false;
        }
        t->abs2[m] = k2;
        t->abs[m] = std::sqrt(k2);
        t->retained[m] = keep ? 1 : 0;
    }
    g.tables_ = std::move(t);
    return g;
}

}  // namespace critlab
