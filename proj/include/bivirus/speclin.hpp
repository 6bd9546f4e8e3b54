#pragma once

// Dense spectral primitives for nonnegative and Metzler matrices.
//
// Everything here is a pure function of its inputs. Eigen supplies storage and
// BLAS-like kernels; the Perron computations themselves are power iterations.

#include "bivirus/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace bivirus {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace speclin {

inline constexpr double kDefaultTol = 1e-12;
inline constexpr double kClassifyTol = 1e-9;

enum class MetzlerClass { hurwitz, singular_boundary, unstable };

inline const char* to_string(MetzlerClass c) {
    switch (c) {
        case MetzlerClass::hurwitz: return "hurwitz";
        case MetzlerClass::singular_boundary: return "singular_boundary";
        case MetzlerClass::unstable: return "unstable";
    }
    return "?";
}

inline bool all_finite(const Mat& A) { return A.allFinite(); }

inline bool is_nonnegative(const Mat& A) { return (A.array() >= 0.0).all(); }

inline bool is_metzler(const Mat& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (i != j && M(i, j) < 0.0) return false;
    return true;
}

inline void require_square(const Mat& A, const char* what) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw DomainError(std::string(what) + ": matrix must be square and non-empty");
    if (!all_finite(A)) throw DomainError(std::string(what) + ": non-finite entry");
}

/// Validating constructor for a nonnegative matrix.
inline Mat nonnegative_matrix(Mat A) {
    require_square(A, "nonnegative_matrix");
    if (!is_nonnegative(A)) throw DomainError("nonnegative_matrix: negative entry");
    return A;
}

/// Validating constructor for a positive diagonal matrix.
inline Mat positive_diagonal(Mat D) {
    require_square(D, "positive_diagonal");
    for (Eigen::Index j = 0; j < D.cols(); ++j)
        for (Eigen::Index i = 0; i < D.rows(); ++i) {
            if (i == j && !(D(i, j) > 0.0))
                throw DomainError("positive_diagonal: nonpositive diagonal entry");
            if (i != j && D(i, j) != 0.0)
                throw DomainError("positive_diagonal: nonzero off-diagonal entry");
        }
    return D;
}

inline Mat positive_diagonal(const Vec& d) { return positive_diagonal(Mat(d.asDiagonal())); }

/// Strongly connected components of the graph with an edge j -> i whenever
/// A(i, j) > 0 for i != j. Returns one component id per vertex; ids are assigned
/// in Tarjan completion order.
inline std::vector<int> strongly_connected_components(const Mat& A, int* count = nullptr) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int next_index = 0;
    int next_comp = 0;

    // Explicit frame stack: (vertex, next successor to inspect).
    struct Frame { int v; int succ; };
    std::vector<Frame> frames;

    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        frames.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            const int v = f.v;
            bool descended = false;
            while (f.succ < n) {
                const int w = f.succ++;
                if (w == v || !(A(w, v) > 0.0)) continue;  // edge v -> w
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            frames.pop_back();
            if (!frames.empty()) {
                const int parent = frames.back().v;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    if (count) *count = next_comp;
    return comp;
}

inline bool pattern_irreducible(const Mat& A) {
    if (A.rows() == 1) return true;
    int count = 0;
    strongly_connected_components(A, &count);
    return count == 1;
}

/// True iff the directed graph of A is strongly connected. A 1x1 matrix is
/// treated as a single node and is irreducible.
inline bool is_irreducible(const Mat& A) {
    require_square(A, "is_irreducible");
    if (!is_nonnegative(A)) throw DomainError("is_irreducible: negative entry");
    return pattern_irreducible(A);
}

struct PerronPair {
    double value = 0.0;
    Vec vector;  // entrywise positive, unit 1-norm
    int iterations = 0;
};

inline int iteration_cap(Eigen::Index n, double tol) {
    const double cap = 100.0 * static_cast<double>(n) * std::log(1.0 / tol);
    return std::max(100, static_cast<int>(std::ceil(cap)));
}

namespace detail {

// Power iteration on a nonnegative irreducible matrix. A diagonal shift makes the
// iteration matrix primitive when A has an all-zero diagonal (periodic case).
inline PerronPair perron_iteration(const Mat& A, double tol) {
    const Eigen::Index n = A.rows();
    if (n == 1) return {A(0, 0), Vec::Ones(1), 0};

    double shift = 0.0;
    if (!(A.diagonal().array() > 0.0).any()) shift = 0.5 * A.rowwise().sum().minCoeff();

    Vec v = Vec::Constant(n, 1.0 / static_cast<double>(n));
    const int cap = iteration_cap(n, tol);
    Vec Av(n);
    for (int it = 1; it <= cap; ++it) {
        Av.noalias() = A * v;
        Vec w = Av + shift * v;
        v = w / w.sum();
        Av.noalias() = A * v;
        const double rayleigh = v.dot(Av) / v.squaredNorm();
        const double residual = (Av - rayleigh * v).cwiseAbs().maxCoeff();
        if (residual <= tol * rayleigh) return {rayleigh, v, it};
    }
    throw NumericError("power iteration did not converge within " + std::to_string(cap) +
                           " iterations",
                       v);
}

}  // namespace detail

/// Perron root and vector of a nonnegative irreducible matrix.
inline PerronPair perron(const Mat& A, double tol = kDefaultTol) {
    require_square(A, "perron");
    if (!is_nonnegative(A)) throw DomainError("perron: negative entry");
    if (!pattern_irreducible(A)) throw DomainError("perron: matrix is reducible");
    if (!(tol > 0.0)) throw DomainError("perron: tolerance must be positive");
    return detail::perron_iteration(A, tol);
}

inline double spectral_radius(const Mat& A, double tol = kDefaultTol) { return perron(A, tol).value; }

inline Vec perron_vector(const Mat& A, double tol = kDefaultTol) { return perron(A, tol).vector; }

/// Greatest real part of any eigenvalue of a Metzler matrix, via
/// s(M) = rho(M + cI) - c. Reducible inputs are split into strongly connected
/// components and the maximum over the diagonal blocks is returned.
inline double spectral_abscissa(const Mat& M, double tol = kDefaultTol) {
    require_square(M, "spectral_abscissa");
    if (!is_metzler(M)) throw DomainError("spectral_abscissa: matrix is not Metzler");
    const Eigen::Index n = M.rows();

    int count = 0;
    const std::vector<int> comp = strongly_connected_components(M, &count);

    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < count; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (comp[i] == c) idx.push_back(i);
        const auto m = static_cast<Eigen::Index>(idx.size());
        if (m == 1) {
            best = std::max(best, M(idx[0], idx[0]));
            continue;
        }
        Mat block(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) block(i, j) = M(idx[i], idx[j]);
        const double shift = 1.0 + block.diagonal().cwiseAbs().maxCoeff();
        block.diagonal().array() += shift;
        best = std::max(best, detail::perron_iteration(block, tol).value - shift);
    }
    return best;
}

inline MetzlerClass classify_abscissa(double s, double tol = kClassifyTol) {
    if (s < -tol) return MetzlerClass::hurwitz;
    if (s > tol) return MetzlerClass::unstable;
    return MetzlerClass::singular_boundary;
}

inline MetzlerClass classify_metzler(const Mat& M, double tol = kClassifyTol) {
    return classify_abscissa(spectral_abscissa(M), tol);
}

}  // namespace speclin
}  // namespace bivirus
