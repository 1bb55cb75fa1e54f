#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace drainage {

enum class Parity { even, odd };
enum class Orientation { forward, backward, none };

const char* to_string(Orientation o);
Orientation orientation_from_string(std::string_view s);

struct SiteCoordinate {
    std::int64_t x = 0;
    std::int64_t t = 0;
    friend bool operator==(const SiteCoordinate&, const SiteCoordinate&) = default;
};

inline Parity parity_of(std::int64_t x, std::int64_t t) {
    return ((x + t) & 1) == 0 ? Parity::even : Parity::odd;
}

// A site whose parity class is fixed by the type; construction throws
// std::invalid_argument when x + t has the wrong parity.
template <Parity P>
class Site {
public:
    Site(std::int64_t x, std::int64_t t) : c_{x, t} {
        if (parity_of(x, t) != P)
            throw std::invalid_argument(P == Parity::even ? "site is not on the even sublattice"
                                                          : "site is not on the odd sublattice");
    }
    explicit Site(SiteCoordinate c) : Site(c.x, c.t) {}
    std::int64_t x() const { return c_.x; }
    std::int64_t t() const { return c_.t; }
    SiteCoordinate coord() const { return c_; }
    friend bool operator==(const Site&, const Site&) = default;

private:
    SiteCoordinate c_;
};

using EvenSite = Site<Parity::even>;
using OddSite = Site<Parity::odd>;

// positions[k] is the x coordinate at time start.t + k (forward) or start.t - k (backward).
struct LatticePath {
    SiteCoordinate start;
    Orientation orientation = Orientation::forward;
    std::vector<std::int64_t> positions;
    std::int64_t time_at(std::size_t k) const {
        auto s = static_cast<std::int64_t>(k);
        return orientation == Orientation::backward ? start.t - s : start.t + s;
    }
};

// Random arrows on the even sublattice. Each arrow is a pure function of
// (seed, x, t): a counter-based hash, so any region can be queried in any order.
class LatticeEnvironment {
public:
    explicit LatticeEnvironment(std::uint64_t seed);
    // Pinned arrows replace the hashed ones; used to build hand-made configurations.
    LatticeEnvironment(std::uint64_t seed, const std::vector<std::pair<SiteCoordinate, int>>& pinned);

    std::uint64_t seed() const { return seed_; }

    int arrow(const EvenSite& s) const { return arrow_unchecked(s.x(), s.t()); }
    // Caller guarantees x + t is even and |x|, |t| < 2^31.
    int arrow_unchecked(std::int64_t x, std::int64_t t) const {
        std::uint64_t k = key(x, t);
        if (!pinned_.empty()) {
            auto it = pinned_.find(k);
            if (it != pinned_.end()) return it->second;
        }
        return (hashed_bit(k) ? 1 : -1);
    }

    EvenSite step_forward(const EvenSite& s) const;
    // The dual walk moves one step back in time, against the arrow below it, so
    // that dual edges never cross forward edges.
    OddSite step_dual(const OddSite& s) const;

    LatticePath forward_path(const EvenSite& s, std::int64_t steps) const;
    LatticePath dual_path(const OddSite& s, std::int64_t steps) const;

    static std::uint64_t key(std::int64_t x, std::int64_t t);

private:
    bool hashed_bit(std::uint64_t k) const;

    std::uint64_t seed_;
    std::uint64_t seed_hash_;
    std::unordered_map<std::uint64_t, int> pinned_;
};

void check_coordinate_range(std::int64_t x, std::int64_t t);

struct SliceEvolution {
    std::int64_t time = 0;
    std::vector<std::int64_t> positions;  // distinct occupied sites, ascending
    std::vector<std::size_t> image;       // image[i]: index in positions reached by input i
};

// Runs the coalescing forward dynamics for `steps` steps from the given sites at
// time t. Inputs need not be sorted; duplicates are allowed and share an image.
SliceEvolution evolve_slice(const LatticeEnvironment& env, std::int64_t t,
                            const std::vector<std::int64_t>& xs, std::int64_t steps);

} // namespace drainage
