#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsi/rng.hpp"

namespace lsi {

/// One piece of the latent distribution: an atom (a == b) or a uniform
/// interval [a, b], carrying probability mass `weight`.
struct SupportPiece {
    double a = 0.0;
    double b = 0.0;
    double weight = 1.0;

    bool is_atom() const { return a == b; }
    double length() const { return b - a; }
};

enum class DistributionKind { Uniform, DiscreteAtoms, PiecewiseUniform };

/// The cdf F of the latent positions: uniform on [0,1], finitely many atoms,
/// or a mixture of uniform pieces on disjoint closed intervals I_1..I_k.
class LatentDistribution {
public:
    static LatentDistribution uniform() {
        return LatentDistribution(DistributionKind::Uniform, {{0.0, 1.0, 1.0}});
    }

    static LatentDistribution atoms(std::vector<std::pair<double, double>> locs_weights) {
        std::vector<SupportPiece> ps;
        for (auto& [loc, w] : locs_weights) ps.push_back({loc, loc, w});
        return LatentDistribution(DistributionKind::DiscreteAtoms, std::move(ps));
    }

    static LatentDistribution piecewise(std::vector<SupportPiece> pieces) {
        return LatentDistribution(DistributionKind::PiecewiseUniform, std::move(pieces));
    }

    DistributionKind kind() const { return kind_; }
    const std::vector<SupportPiece>& pieces() const { return pieces_; }

    /// Support intervals I_1..I_k in increasing order (atoms degenerate to points).
    std::vector<std::pair<double, double>> support_intervals() const {
        std::vector<std::pair<double, double>> iv;
        for (const auto& p : pieces_) iv.emplace_back(p.a, p.b);
        return iv;
    }

    /// Index of the support interval containing x, or -1.
    int interval_index(double x, double tol = 1e-12) const {
        for (std::size_t i = 0; i < pieces_.size(); ++i)
            if (x >= pieces_[i].a - tol && x <= pieces_[i].b + tol) return static_cast<int>(i);
        return -1;
    }

    /// Inverse-cdf draw from the key (seed, index). Two sub-draws: piece
    /// selection and position within the piece.
    double draw(std::uint64_t seed, std::uint64_t index) const {
        double u = rng::uniform(seed, index, 0);
        std::size_t p = 0;
        double acc = 0.0;
        for (; p + 1 < pieces_.size(); ++p) {
            acc += pieces_[p].weight;
            if (u < acc) break;
        }
        const auto& piece = pieces_[p];
        if (piece.is_atom()) return piece.a;
        return piece.a + rng::uniform(seed, index, 1) * piece.length();
    }

private:
    LatentDistribution(DistributionKind kind, std::vector<SupportPiece> pieces)
        : kind_(kind), pieces_(std::move(pieces)) {
        validate();
    }

    void validate() const {
        if (pieces_.empty()) throw std::invalid_argument("LatentDistribution: no support pieces");
        double total = 0.0;
        for (const auto& p : pieces_) {
            if (p.weight <= 0.0) throw std::invalid_argument("LatentDistribution: weights must be positive");
            if (p.b < p.a) throw std::invalid_argument("LatentDistribution: interval [a,b] with b < a");
            if (p.a < 0.0 || p.b > 1.0) throw std::invalid_argument("LatentDistribution: support must lie in [0,1]");
            total += p.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("LatentDistribution: weights must sum to 1 within 1e-12");
        auto sorted = pieces_;
        std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
            if (sorted[i + 1].a < sorted[i].b ||
                (sorted[i + 1].is_atom() && sorted[i].is_atom() && sorted[i + 1].a == sorted[i].a))
                throw std::invalid_argument("LatentDistribution: support pieces overlap");
    }

    DistributionKind kind_;
    std::vector<SupportPiece> pieces_;
};

/// n latent positions drawn i.i.d. from F, reproducible from (distribution, n, seed).
struct LatentSample {
    std::vector<double> positions;
    std::uint64_t seed = 0;

    std::size_t size() const { return positions.size(); }
    double operator[](std::size_t i) const { return positions[i]; }
};

inline LatentSample sample_latents(const LatentDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_latents: n must be >= 1");
    LatentSample s;
    s.seed = seed;
    s.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.positions[i] = dist.draw(seed, i);
    return s;
}

}  // namespace lsi
