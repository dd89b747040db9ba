#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbound/entropy_vector.hpp"
#include "qbound/query.hpp"

namespace qbound {

// Tensor-product layout H = H_{X1} (x) ... (x) H_{Xn}.  Flat basis indices
// are row-major with the first variable most significant.
class SubsystemLayout {
public:
    SubsystemLayout(std::vector<std::string> variables, std::vector<std::size_t> dims);

    const std::vector<std::string>& variables() const { return vars_; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t num_variables() const { return vars_.size(); }
    std::uint64_t total_dim() const { return total_; }

    std::uint64_t encode(const std::vector<std::size_t>& values) const;
    std::vector<std::size_t> decode(std::uint64_t flat) const;

    // Mask over this layout's variable positions.
    VarSet mask_of(const std::vector<std::string>& names) const;
    // Layout of the variables in `keep`, in the same relative order.
    SubsystemLayout restrict_to(VarSet keep) const;
    // Flat index in restrict_to(keep) of the basis vector `flat`.
    std::uint64_t project(std::uint64_t flat, VarSet keep) const;

    bool operator==(const SubsystemLayout&) const = default;

private:
    std::vector<std::string> vars_;
    std::vector<std::size_t> dims_;
    std::uint64_t total_ = 1;
};

// Unit-trace positive semidefinite Hermitian operator.  Classical states are
// held as a sparse diagonal so their size is not limited by the dense cap.
class DensityMatrix {
public:
    static constexpr std::uint64_t kMaxDenseDim = 256;

    // Validates Hermiticity, unit trace and PSD within 1e-10.
    static DensityMatrix dense(SubsystemLayout layout, Eigen::MatrixXcd rho);
    // Probabilities by flat index; zeros are dropped.
    static DensityMatrix diagonal(SubsystemLayout layout, std::map<std::uint64_t, double> probabilities);

    const SubsystemLayout& layout() const { return layout_; }
    std::uint64_t dim() const { return layout_.total_dim(); }
    bool is_diagonal_form() const { return !dense_; }
    const std::map<std::uint64_t, double>& diagonal_entries() const { return diag_; }

    Eigen::MatrixXcd to_dense() const;
    std::complex<double> operator()(std::uint64_t i, std::uint64_t j) const;

private:
    DensityMatrix(SubsystemLayout layout, std::optional<Eigen::MatrixXcd> dense, std::map<std::uint64_t, double> diag)
        : layout_(std::move(layout)), dense_(std::move(dense)), diag_(std::move(diag)) {}

    SubsystemLayout layout_;
    std::optional<Eigen::MatrixXcd> dense_;
    std::map<std::uint64_t, double> diag_;
};

struct Spectrum {
    std::vector<double> values;  // descending, clamped at 0, sums to 1
};

using Tuple = std::vector<std::size_t>;

// rho = sum_t p(t) |t><t| over value-index tuples in layout order.
DensityMatrix encode_table(const std::vector<std::pair<Tuple, double>>& weighted_tuples, const SubsystemLayout& layout);

// Reduced state on the layout variables not in `trace_out`.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& trace_out);
// Reduced state on `keep` (positions in rho's layout).
DensityMatrix reduce(const DensityMatrix& rho, VarSet keep);

Spectrum spectrum(const DensityMatrix& rho);

constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();

// Renyi entropy of order alpha in bits; alpha = 1 is von Neumann, alpha = 0
// is log2 rank, alpha = inf is min-entropy.
double renyi_entropy(const Spectrum& s, double alpha);
double renyi_entropy(const DensityMatrix& rho, double alpha);
double von_neumann_entropy(const DensityMatrix& rho);

// H_alpha(A u B) - H_alpha(A).  The state is first reduced to A u B.
double conditional_renyi(const DensityMatrix& rho, const std::vector<std::string>& a,
                         const std::vector<std::string>& b, double alpha);

DensityMatrix decohere(const DensityMatrix& rho);
bool is_classical(const DensityMatrix& rho, double tol = 1e-10);

// A -> B via equal nonzero spectra of rho_{AB} and rho_A.
bool fd_satisfied_spectral(const DensityMatrix& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b, double tol = 1e-9);
// A -> B via an explicit map on the support of a classical state.
bool fd_satisfied_functional(const DensityMatrix& rho, const std::vector<std::string>& a,
                             const std::vector<std::string>& b);

// H_alpha of every nonempty reduced state, SubsetIndex order over the
// layout's variables.
EntropyVector quantum_entropy_vector(const DensityMatrix& rho, double alpha);

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qbound
