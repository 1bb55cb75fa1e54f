#include "drainage/lattice_env.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "drainage/parallel.hpp"

namespace drainage {

const char* to_string(Orientation o) {
    switch (o) {
    case Orientation::forward: return "forward";
    case Orientation::backward: return "backward";
    default: return "none";
    }
}

Orientation orientation_from_string(std::string_view s) {
    if (s == "forward") return Orientation::forward;
    if (s == "backward") return Orientation::backward;
    if (s == "none") return Orientation::none;
    throw std::invalid_argument("unknown orientation '" + std::string(s) + "'");
}

namespace {

constexpr std::int64_t kCoordLimit = std::int64_t{1} << 31;

std::uint64_t zigzag32(std::int64_t v) {
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(v << 1) ^ static_cast<std::uint64_t>(v >> 63));
}

} // namespace

void check_coordinate_range(std::int64_t x, std::int64_t t) {
    if (x <= -kCoordLimit || x >= kCoordLimit || t <= -kCoordLimit || t >= kCoordLimit)
        throw std::out_of_range("lattice coordinate outside the supported range |x|,|t| < 2^31");
}

std::uint64_t LatticeEnvironment::key(std::int64_t x, std::int64_t t) {
    return (zigzag32(x) << 32) | zigzag32(t);
}

LatticeEnvironment::LatticeEnvironment(std::uint64_t seed) : seed_(seed), seed_hash_(mix64(seed ^ 0x243f6a8885a308d3ULL)) {}

LatticeEnvironment::LatticeEnvironment(std::uint64_t seed, const std::vector<std::pair<SiteCoordinate, int>>& pinned)
    : LatticeEnvironment(seed) {
    for (const auto& [c, b] : pinned) {
        EvenSite check(c);  // throws on odd sites
        check_coordinate_range(c.x, c.t);
        if (b != 1 && b != -1) throw std::invalid_argument("pinned arrow must be +1 or -1");
        pinned_[key(c.x, c.t)] = b;
    }
}

bool LatticeEnvironment::hashed_bit(std::uint64_t k) const {
    return (mix64(mix64(k) ^ seed_hash_) >> 63) != 0;
}

EvenSite LatticeEnvironment::step_forward(const EvenSite& s) const {
    check_coordinate_range(s.x(), s.t() + 1);
    return EvenSite(s.x() + arrow(s), s.t() + 1);
}

OddSite LatticeEnvironment::step_dual(const OddSite& s) const {
    check_coordinate_range(s.x(), s.t() - 1);
    // (x, t-1) is even because (x, t) is odd
    return OddSite(s.x() - arrow_unchecked(s.x(), s.t() - 1), s.t() - 1);
}

LatticePath LatticeEnvironment::forward_path(const EvenSite& s, std::int64_t steps) const {
    if (steps < 0) throw std::invalid_argument("forward_path: negative step count");
    check_coordinate_range(s.x() + (s.x() < 0 ? -steps : steps), s.t() + steps);
    LatticePath p{s.coord(), Orientation::forward, {}};
    p.positions.reserve(static_cast<std::size_t>(steps) + 1);
    std::int64_t x = s.x();
    p.positions.push_back(x);
    for (std::int64_t k = 0; k < steps; ++k) {
        x += arrow_unchecked(x, s.t() + k);
        p.positions.push_back(x);
    }
    return p;
}

LatticePath LatticeEnvironment::dual_path(const OddSite& s, std::int64_t steps) const {
    if (steps < 0) throw std::invalid_argument("dual_path: negative step count");
    check_coordinate_range(s.x() + (s.x() < 0 ? -steps : steps), s.t() - steps);
    LatticePath p{s.coord(), Orientation::backward, {}};
    p.positions.reserve(static_cast<std::size_t>(steps) + 1);
    std::int64_t y = s.x();
    p.positions.push_back(y);
    for (std::int64_t k = 1; k <= steps; ++k) {
        y -= arrow_unchecked(y, s.t() - k);
        p.positions.push_back(y);
    }
    return p;
}

SliceEvolution evolve_slice(const LatticeEnvironment& env, std::int64_t t,
                            const std::vector<std::int64_t>& xs, std::int64_t steps) {
    if (steps < 0) throw std::invalid_argument("evolve_slice: negative step count");
    for (auto x : xs) {
        if (parity_of(x, t) != Parity::even) throw std::invalid_argument("evolve_slice: input site is not even");
        check_coordinate_range(x, t);
    }
    check_coordinate_range(0, t + steps);

    std::vector<std::int64_t> start(xs);
    std::sort(start.begin(), start.end());
    start.erase(std::unique(start.begin(), start.end()), start.end());

    // walkers stay ordered because neighbours are at least 2 apart and move by 1;
    // a merge can only happen between neighbours landing on the same site.
    std::vector<std::size_t> uf(start.size());
    std::iota(uf.begin(), uf.end(), std::size_t{0});
    std::vector<std::int64_t> pos(start);
    std::vector<std::size_t> id(start.size());
    std::iota(id.begin(), id.end(), std::size_t{0});

    for (std::int64_t k = 0; k < steps; ++k) {
        const std::int64_t time = t + k;
        std::size_t w = 0;
        for (std::size_t r = 0; r < pos.size(); ++r) {
            std::int64_t nx = pos[r] + env.arrow_unchecked(pos[r], time);
            if (w > 0 && pos[w - 1] == nx) {
                uf[id[r]] = id[w - 1];
                continue;
            }
            pos[w] = nx;
            id[w] = id[r];
            ++w;
        }
        pos.resize(w);
        id.resize(w);
    }

    auto find = [&](std::size_t a) {
        std::size_t r = a;
        while (uf[r] != r) r = uf[r];
        while (uf[a] != r) {
            std::size_t n = uf[a];
            uf[a] = r;
            a = n;
        }
        return r;
    };

    std::vector<std::size_t> slot_of_root(start.size(), 0);
    for (std::size_t w = 0; w < id.size(); ++w) slot_of_root[id[w]] = w;

    SliceEvolution out;
    out.time = t + steps;
    out.positions = pos;
    out.image.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto it = std::lower_bound(start.begin(), start.end(), xs[i]);
        out.image[i] = slot_of_root[find(static_cast<std::size_t>(it - start.begin()))];
    }
    return out;
}

} // namespace drainage
