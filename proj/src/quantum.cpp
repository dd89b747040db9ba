#include "qbound/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "qbound/jacobi.hpp"

namespace qbound {

namespace {

constexpr double kStateTol = 1e-10;
constexpr double kRankTol = 1e-9;
constexpr double kZeroEigen = 1e-12;
constexpr std::uint64_t kMaxMaterialized = 4096;
constexpr std::uint64_t kMaxSpectrumDim = std::uint64_t{1} << 24;

}  // namespace

SubsystemLayout::SubsystemLayout(std::vector<std::string> variables, std::vector<std::size_t> dims)
    : vars_(std::move(variables)), dims_(std::move(dims)) {
    if (vars_.size() != dims_.size()) throw std::invalid_argument("layout: one dimension per variable required");
    if (std::set<std::string>(vars_.begin(), vars_.end()).size() != vars_.size())
        throw std::invalid_argument("layout: duplicate variable");
    if (vars_.size() > 31) throw std::invalid_argument("layout: at most 31 subsystems");
    for (auto d : dims_) {
        if (d < 1) throw std::invalid_argument("layout: local dimensions must be >= 1");
        if (total_ > (std::uint64_t{1} << 48) / d) throw std::invalid_argument("layout: total dimension overflow");
        total_ *= d;
    }
}

std::uint64_t SubsystemLayout::encode(const std::vector<std::size_t>& values) const {
    if (values.size() != dims_.size()) throw std::invalid_argument("layout: tuple arity mismatch");
    std::uint64_t flat = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (values[i] >= dims_[i]) throw std::out_of_range("layout: value outside the domain of " + vars_[i]);
        flat = flat * dims_[i] + values[i];
    }
    return flat;
}

std::vector<std::size_t> SubsystemLayout::decode(std::uint64_t flat) const {
    if (flat >= total_) throw std::out_of_range("layout: flat index out of range");
    std::vector<std::size_t> out(dims_.size());
    for (std::size_t i = dims_.size(); i-- > 0;) {
        out[i] = static_cast<std::size_t>(flat % dims_[i]);
        flat /= dims_[i];
    }
    return out;
}

VarSet SubsystemLayout::mask_of(const std::vector<std::string>& names) const {
    VarSet s;
    for (const auto& n : names) {
        auto it = std::find(vars_.begin(), vars_.end(), n);
        if (it == vars_.end()) throw std::invalid_argument("layout: unknown variable " + n);
        s = s | VarSet::single(static_cast<std::size_t>(it - vars_.begin()));
    }
    return s;
}

SubsystemLayout SubsystemLayout::restrict_to(VarSet keep) const {
    std::vector<std::string> v;
    std::vector<std::size_t> d;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (keep.contains(i)) {
            v.push_back(vars_[i]);
            d.push_back(dims_[i]);
        }
    return SubsystemLayout(std::move(v), std::move(d));
}

std::uint64_t SubsystemLayout::project(std::uint64_t flat, VarSet keep) const {
    const auto values = decode(flat);
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (keep.contains(i)) out = out * dims_[i] + values[i];
    return out;
}

// ---------------------------------------------------------------------------

DensityMatrix DensityMatrix::dense(SubsystemLayout layout, Eigen::MatrixXcd rho) {
    const auto d = layout.total_dim();
    if (d > kMaxDenseDim) throw std::invalid_argument("dense density matrices are limited to dimension 256");
    if (rho.rows() != static_cast<Eigen::Index>(d) || rho.cols() != static_cast<Eigen::Index>(d))
        throw std::invalid_argument("density matrix size does not match layout");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kStateTol) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho.trace() - std::complex<double>(1.0)) > kStateTol)
        throw std::invalid_argument("density matrix trace is not 1");
    if (hermitian_eigenvalues(rho).minCoeff() < -kStateTol)
        throw std::invalid_argument("density matrix is not positive semidefinite");
    return DensityMatrix(std::move(layout), std::move(rho), {});
}

DensityMatrix DensityMatrix::diagonal(SubsystemLayout layout, std::map<std::uint64_t, double> probabilities) {
    double total = 0.0;
    for (auto it = probabilities.begin(); it != probabilities.end();) {
        if (it->first >= layout.total_dim()) throw std::out_of_range("diagonal entry outside the layout");
        if (it->second < 0.0 || !std::isfinite(it->second))
            throw std::invalid_argument("probabilities must be finite and non-negative");
        total += it->second;
        it = it->second == 0.0 ? probabilities.erase(it) : std::next(it);
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");
    return DensityMatrix(std::move(layout), std::nullopt, std::move(probabilities));
}

Eigen::MatrixXcd DensityMatrix::to_dense() const {
    if (dense_) return *dense_;
    const auto d = dim();
    if (d > kMaxMaterialized) throw std::invalid_argument("state too large to materialize densely");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const auto& [i, p] : diag_) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p;
    return m;
}

std::complex<double> DensityMatrix::operator()(std::uint64_t i, std::uint64_t j) const {
    if (dense_) return (*dense_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (i != j) return 0.0;
    auto it = diag_.find(i);
    return it == diag_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------

DensityMatrix encode_table(const std::vector<std::pair<Tuple, double>>& weighted_tuples, const SubsystemLayout& layout) {
    std::map<std::uint64_t, double> probs;
    for (const auto& [t, p] : weighted_tuples) probs[layout.encode(t)] += p;
    return DensityMatrix::diagonal(layout, std::move(probs));
}

DensityMatrix reduce(const DensityMatrix& rho, VarSet keep) {
    const auto& layout = rho.layout();
    const VarSet all = VarSet::full(layout.num_variables());
    if (keep.empty()) throw std::invalid_argument("partial trace over all variables");
    if (!keep.subset_of(all)) throw std::invalid_argument("partial trace: subset outside the layout");
    if (keep == all) return rho;

    SubsystemLayout reduced = layout.restrict_to(keep);
    const VarSet traced = all.without(keep);
    if (rho.is_diagonal_form()) {
        std::map<std::uint64_t, double> probs;
        for (const auto& [i, p] : rho.diagonal_entries()) probs[layout.project(i, keep)] += p;
        double total = 0.0;
        for (const auto& [i, p] : probs) total += p;
        for (auto& [i, p] : probs) p /= total;
        return DensityMatrix::diagonal(std::move(reduced), std::move(probs));
    }

    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    std::vector<std::uint64_t> kept(static_cast<std::size_t>(d)), rest(static_cast<std::size_t>(d));
    for (Eigen::Index f = 0; f < d; ++f) {
        kept[static_cast<std::size_t>(f)] = layout.project(static_cast<std::uint64_t>(f), keep);
        rest[static_cast<std::size_t>(f)] = layout.project(static_cast<std::uint64_t>(f), traced);
    }
    const Eigen::MatrixXcd full = rho.to_dense();
    const auto rd = static_cast<Eigen::Index>(reduced.total_dim());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rd, rd);
    for (Eigen::Index f = 0; f < d; ++f)
        for (Eigen::Index g = 0; g < d; ++g)
            if (rest[static_cast<std::size_t>(f)] == rest[static_cast<std::size_t>(g)])
                out(static_cast<Eigen::Index>(kept[static_cast<std::size_t>(f)]),
                    static_cast<Eigen::Index>(kept[static_cast<std::size_t>(g)])) += full(f, g);
    out = (out + out.adjoint().eval()) * 0.5;
    return DensityMatrix::dense(std::move(reduced), std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& trace_out) {
    const VarSet out = rho.layout().mask_of(trace_out);
    return reduce(rho, VarSet::full(rho.layout().num_variables()).without(out));
}

Spectrum spectrum(const DensityMatrix& rho) {
    if (rho.dim() > kMaxSpectrumDim) throw std::invalid_argument("spectrum: dimension too large");
    std::vector<double> v;
    if (rho.is_diagonal_form()) {
        for (const auto& [i, p] : rho.diagonal_entries()) v.push_back(p);
    } else {
        const Eigen::VectorXd ev = hermitian_eigenvalues(rho.to_dense());
        for (double x : ev) v.push_back(std::abs(x) <= kZeroEigen ? 0.0 : x);
    }
    v.resize(static_cast<std::size_t>(rho.dim()), 0.0);
    for (auto& x : v) x = std::max(0.0, x);
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= total;
    std::sort(v.begin(), v.end(), std::greater<>());
    return {std::move(v)};
}

double renyi_entropy(const Spectrum& s, double alpha) {
    if (std::isnan(alpha) || alpha < 0.0) throw std::invalid_argument("Renyi order must be >= 0");
    if (s.values.empty()) throw std::invalid_argument("empty spectrum");
    double h = 0.0;
    if (alpha == 0.0) {
        const auto rank = std::count_if(s.values.begin(), s.values.end(), [](double x) { return x > kRankTol; });
        h = std::log2(static_cast<double>(std::max<std::ptrdiff_t>(rank, 1)));
    } else if (alpha == 1.0) {
        for (double x : s.values)
            if (x > kZeroEigen) h -= x * std::log2(x);
    } else if (std::isinf(alpha)) {
        h = -std::log2(s.values.front());
    } else {
        // sum x^alpha - 1 = sum x (x^(alpha-1) - 1), accurate near alpha = 1.
        double excess = 0.0;
        for (double x : s.values)
            if (x > 0.0) excess += x * std::expm1((alpha - 1.0) * std::log(x));
        h = std::log1p(excess) / std::log(2.0) / (1.0 - alpha);
    }
    return std::clamp(h, 0.0, std::log2(static_cast<double>(s.values.size())));
}

double renyi_entropy(const DensityMatrix& rho, double alpha) { return renyi_entropy(spectrum(rho), alpha); }

double von_neumann_entropy(const DensityMatrix& rho) { return renyi_entropy(rho, 1.0); }

double conditional_renyi(const DensityMatrix& rho, const std::vector<std::string>& a, const std::vector<std::string>& b,
                         double alpha) {
    const VarSet ma = rho.layout().mask_of(a);
    const VarSet mb = rho.layout().mask_of(b);
    if (!(ma & mb).empty()) throw std::invalid_argument("conditional entropy: A and B overlap");
    if ((ma | mb).empty()) throw std::invalid_argument("conditional entropy: A and B are both empty");
    const double joint = renyi_entropy(reduce(rho, ma | mb), alpha);
    return ma.empty() ? joint : joint - renyi_entropy(reduce(rho, ma), alpha);
}

DensityMatrix decohere(const DensityMatrix& rho) {
    if (rho.is_diagonal_form()) return rho;
    const Eigen::MatrixXcd m = rho.to_dense();
    std::map<std::uint64_t, double> probs;
    for (Eigen::Index i = 0; i < m.rows(); ++i) probs[static_cast<std::uint64_t>(i)] = std::max(0.0, m(i, i).real());
    double total = 0.0;
    for (auto& [i, p] : probs) total += p;
    for (auto& [i, p] : probs) p /= total;
    return DensityMatrix::diagonal(rho.layout(), std::move(probs));
}

bool is_classical(const DensityMatrix& rho, double tol) {
    if (rho.is_diagonal_form()) return true;
    Eigen::MatrixXcd m = rho.to_dense();
    m.diagonal().setZero();
    return m.size() == 0 || m.cwiseAbs().maxCoeff() <= tol;
}

bool fd_satisfied_spectral(const DensityMatrix& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b, double tol) {
    const VarSet ma = rho.layout().mask_of(a);
    const VarSet mb = rho.layout().mask_of(b);
    if (!(ma & mb).empty()) throw std::invalid_argument("fd check: A and B overlap");
    if (mb.empty()) return true;
    auto nonzero = [tol](const Spectrum& s) {
        std::vector<double> out;
        for (double x : s.values)
            if (x > tol) out.push_back(x);
        return out;
    };
    std::vector<double> joint = nonzero(spectrum(reduce(rho, ma | mb)));
    std::vector<double> marginal = ma.empty() ? std::vector<double>{1.0} : nonzero(spectrum(reduce(rho, ma)));
    const std::size_t len = std::max(joint.size(), marginal.size());
    joint.resize(len, 0.0);
    marginal.resize(len, 0.0);
    for (std::size_t i = 0; i < len; ++i)
        if (std::abs(joint[i] - marginal[i]) > tol) return false;
    return true;
}

bool fd_satisfied_functional(const DensityMatrix& rho, const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
    if (!is_classical(rho)) throw std::invalid_argument("explicit-function FD check needs a classical state");
    const auto& layout = rho.layout();
    const VarSet ma = layout.mask_of(a);
    const VarSet mb = layout.mask_of(b);
    const DensityMatrix diag = decohere(rho);
    std::map<std::uint64_t, std::uint64_t> f;
    for (const auto& [i, p] : diag.diagonal_entries()) {
        if (p <= kZeroEigen) continue;
        const auto key = layout.project(i, ma);
        const auto val = layout.project(i, mb);
        auto [it, fresh] = f.emplace(key, val);
        if (!fresh && it->second != val) return false;
    }
    return true;
}

EntropyVector quantum_entropy_vector(const DensityMatrix& rho, double alpha) {
    const std::size_t n = rho.layout().num_variables();
    if (n == 0 || n > 8) throw std::invalid_argument("entropy vectors need 1..8 subsystems");
    if (rho.dim() > (std::uint64_t{1} << 16)) throw std::invalid_argument("entropy vector: dimension exceeds 2^16");
    SubsetIndex idx(n);
    EntropyVector out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.count())), false};
    for (std::size_t i = 1; i <= idx.count(); ++i) out[idx.subset(i)] = renyi_entropy(reduce(rho, idx.subset(i)), alpha);
    return out;
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    std::vector<std::string> vars = a.layout().variables();
    vars.insert(vars.end(), b.layout().variables().begin(), b.layout().variables().end());
    std::vector<std::size_t> dims = a.layout().dims();
    dims.insert(dims.end(), b.layout().dims().begin(), b.layout().dims().end());
    SubsystemLayout layout(std::move(vars), std::move(dims));
    const std::uint64_t db = b.dim();
    if (a.is_diagonal_form() && b.is_diagonal_form()) {
        std::map<std::uint64_t, double> probs;
        for (const auto& [i, p] : a.diagonal_entries())
            for (const auto& [j, q] : b.diagonal_entries()) probs[i * db + j] = p * q;
        return DensityMatrix::diagonal(std::move(layout), std::move(probs));
    }
    const Eigen::MatrixXcd ma = a.to_dense(), mb = b.to_dense();
    Eigen::MatrixXcd k(ma.rows() * mb.rows(), ma.cols() * mb.cols());
    for (Eigen::Index i = 0; i < ma.rows(); ++i)
        for (Eigen::Index j = 0; j < ma.cols(); ++j) k.block(i * mb.rows(), j * mb.cols(), mb.rows(), mb.cols()) = ma(i, j) * mb;
    return DensityMatrix::dense(std::move(layout), std::move(k));
}

}  // namespace qbound
