#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "manybody/chebyshev.hpp"
#include "manybody/eigen.hpp"
#include "manybody/graph.hpp"
#include "manybody/rng.hpp"

namespace manybody {

/// C(n, r), saturating at 2^62 so rank arithmetic never overflows.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    constexpr std::uint64_t cap = std::uint64_t(1) << 62;
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        if (c > cap / (n - r + i)) return cap;
        c = c * (n - r + i) / i;
    }
    return c;
}

/// A k-node star: one center plus k−1 of its neighbors, leaves sorted.
struct MotifInstance {
    NodeId center;
    std::vector<NodeId> leaves;
};

/// Lexicographic rank → combination of r items out of n (combinadic order).
inline std::vector<std::uint32_t> unrank_combination(std::uint64_t rank, std::uint32_t n,
                                                     std::uint32_t r) {
    std::vector<std::uint32_t> out;
    out.reserve(r);
    std::uint32_t next = 0;
    for (std::uint32_t slot = 0; slot < r; ++slot) {
        for (std::uint32_t v = next; v < n; ++v) {
            const std::uint64_t block = binomial(n - 1 - v, r - 1 - slot);
            if (rank < block) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            rank -= block;
        }
    }
    return out;
}

/// All (or a uniform seeded sample of `cap`) leaf sets of size k−1 among
/// N(i). Exhaustive enumeration is lexicographic over the sorted neighbor
/// list; sampling draws distinct combination ranks without replacement, so
/// every neighbor is equally likely to appear. Nodes with fewer than k−1
/// neighbors get an empty list.
inline std::vector<MotifInstance> enumerate_motifs(const Graph& g, NodeId i, std::size_t k,
                                                   std::size_t cap, std::uint64_t seed) {
    if (k < 3) throw std::invalid_argument("enumerate_motifs: order must be >= 3");
    const auto& nb = g.adjacency[i];
    const std::uint32_t r = static_cast<std::uint32_t>(k - 1);
    std::vector<MotifInstance> out;
    if (nb.size() < r) return out;
    const std::uint64_t total = binomial(nb.size(), r);
    if (cap == 0 || total <= cap) {
        std::vector<std::uint32_t> idx(r);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            MotifInstance m{i, {}};
            m.leaves.reserve(r);
            for (std::uint32_t x : idx) m.leaves.push_back(nb[x]);
            out.push_back(std::move(m));
            // next lexicographic combination
            std::int64_t pos = r - 1;
            while (pos >= 0 && idx[pos] == nb.size() - r + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (std::size_t j = pos + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        }
        return out;
    }
    Rng rng(derive_seed(seed, i, k));
    std::unordered_set<std::uint64_t> ranks;
    ranks.reserve(cap * 2);
    std::vector<std::uint64_t> drawn;
    drawn.reserve(cap);
    while (drawn.size() < cap) {
        const std::uint64_t rk = rng.next_below(total);
        if (ranks.insert(rk).second) drawn.push_back(rk);
    }
    for (std::uint64_t rk : drawn) {
        MotifInstance m{i, {}};
        m.leaves.reserve(r);
        for (std::uint32_t x : unrank_combination(rk, static_cast<std::uint32_t>(nb.size()), r))
            m.leaves.push_back(nb[x]);
        out.push_back(std::move(m));
    }
    return out;
}

/// Laplacian of a star with the given leaf edge weights; row 0 is the center.
inline Matrix star_laplacian(const std::vector<double>& weights) {
    const std::size_t k = weights.size() + 1;
    Matrix l(k, k);
    double total = 0.0;
    for (std::size_t s = 0; s < weights.size(); ++s) {
        const double w = weights[s];
        total += w;
        l(0, s + 1) = -w;
        l(s + 1, 0) = -w;
        l(s + 1, s + 1) = w;
    }
    l(0, 0) = total;
    return l;
}

/// Decomposition of one star Laplacian plus everything the message path
/// needs: λ_max = max |eigenvalue| (the shift scale for possibly indefinite
/// sign-weighted stars) and the center filter rows
///   rows(k'−1, s) = [T_{k'}(L̃)]_{0,s},  k' = 1..k,
/// precomputed per eigenbasis so a cached motif costs no eigensolve at all.
struct MotifSpectrum {
    std::size_t k = 0;
    std::vector<double> weights;  // as decomposed (canonical order for cached entries)
    EigenDecomposition decomposition;
    double lambda_max = 0.0;
    bool degenerate = false;  // all-zero weights: filter undefined, message is zero
    Matrix rows;              // (k) x (k): Chebyshev center rows, see above

    double filter_center_row(const std::vector<double>& theta, std::size_t slot) const {
        double f = 0.0;
        for (std::size_t j = 0; j < theta.size(); ++j) f += theta[j] * rows(j, slot);
        return f;
    }
};

inline MotifSpectrum make_motif_spectrum(const std::vector<double>& weights, FilterBasis basis) {
    MotifSpectrum ms;
    ms.k = weights.size() + 1;
    ms.weights = weights;
    ms.decomposition = eigh(star_laplacian(weights));
    ms.lambda_max = ms.decomposition.max_abs_eigenvalue();
    ms.rows = Matrix(ms.k, ms.k);
    if (ms.lambda_max < 1e-12) {
        ms.degenerate = true;
        return ms;
    }
    const Matrix& u = ms.decomposition.eigenvectors;
    for (std::size_t m = 0; m < ms.k; ++m) {
        const double shifted = 2.0 * ms.decomposition.eigenvalues[m] / ms.lambda_max - 1.0;
        const auto t = chebyshev_values(shifted, ms.k);
        const double u0 = (basis == FilterBasis::spectral) ? u(0, m) : u(m, 0);
        for (std::size_t s = 0; s < ms.k; ++s) {
            const double us = (basis == FilterBasis::spectral) ? u(s, m) : u(m, s);
            for (std::size_t kp = 1; kp <= ms.k; ++kp) ms.rows(kp - 1, s) += t[kp] * u0 * us;
        }
    }
    return ms;
}

/// Memoized star spectra for the discrete weight alphabets (sign-rounded and
/// unweighted modes). The key is (k, sorted sign multiset): star leaves are
/// exchangeable, so any two patterns with equal multisets share one entry and
/// callers translate leaf slots through the sort permutation. Concurrent
/// lookups lock only the map; entries are stable once inserted.
class SpectrumCache {
public:
    explicit SpectrumCache(FilterBasis basis = FilterBasis::spectral) : basis_(basis) {}

    /// signs in {-1, 0, +1}, one per leaf, in actual leaf order.
    const MotifSpectrum& get_signed(const std::vector<int>& signs) {
        std::vector<int> sorted = signs;
        std::sort(sorted.begin(), sorted.end());
        return lookup(encode(sorted), sorted);
    }

    const MotifSpectrum& get_unweighted(std::size_t k) {
        if (k < 2) throw std::invalid_argument("SpectrumCache: motif size must be >= 2");
        std::vector<int> ones(k - 1, 1);
        return lookup(encode(ones), ones);
    }

    /// Canonical slot of each actual slot (slot 0 = center, fixed). Leaves are
    /// stably sorted by sign so equal signs keep their relative order.
    static std::vector<std::size_t> canonical_slots(const std::vector<int>& signs) {
        const std::size_t r = signs.size();
        std::vector<std::size_t> order(r);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return signs[a] < signs[b]; });
        std::vector<std::size_t> slot(r + 1);
        slot[0] = 0;
        for (std::size_t pos = 0; pos < r; ++pos) slot[order[pos] + 1] = pos + 1;
        return slot;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.size();
    }
    std::size_t decompositions_performed() const {
        std::lock_guard<std::mutex> lock(mu_);
        return decompositions_;
    }

private:
    static std::uint64_t encode(const std::vector<int>& sorted_signs) {
        std::uint64_t key = sorted_signs.size() + 1;
        for (int s : sorted_signs) key = key * 3 + std::uint64_t(s + 1);
        return key;
    }

    const MotifSpectrum& lookup(std::uint64_t key, const std::vector<int>& sorted_signs) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
        std::vector<double> w(sorted_signs.begin(), sorted_signs.end());
        auto [pos, inserted] = entries_.emplace(key, make_motif_spectrum(w, basis_));
        ++decompositions_;
        return pos->second;
    }

    FilterBasis basis_;
    mutable std::mutex mu_;
    std::map<std::uint64_t, MotifSpectrum> entries_;  // node-based: stable references
    std::size_t decompositions_ = 0;
};

}  // namespace manybody
