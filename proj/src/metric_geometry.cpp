#include "drainage/metric_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace drainage {

double FiniteMetricSpace::diameter() const {
    double d = 0.0;
    for (double v : dist) d = std::max(d, v);
    return d;
}

FiniteMetricSpace FiniteMetricSpace::from_rows(std::vector<std::string> labels,
                                               const std::vector<std::vector<double>>& rows) {
    const std::size_t n = labels.size();
    if (rows.size() != n) throw std::invalid_argument("metric: row count differs from label count");
    FiniteMetricSpace m;
    m.labels = std::move(labels);
    m.dist.reserve(n * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw std::invalid_argument("metric: matrix is not square");
        m.dist.insert(m.dist.end(), r.begin(), r.end());
    }
    return m;
}

FiniteMetricSpace FiniteMetricSpace::from_ticks(std::vector<std::string> labels, std::vector<std::int64_t> ticks,
                                                double unit) {
    const std::size_t n = labels.size();
    if (ticks.size() != n * n) throw std::invalid_argument("metric: tick matrix has wrong size");
    if (!(unit > 0.0)) throw std::invalid_argument("metric: tick unit must be positive");
    FiniteMetricSpace m;
    m.labels = std::move(labels);
    m.dist.resize(n * n);
    for (std::size_t i = 0; i < n * n; ++i) m.dist[i] = static_cast<double>(ticks[i]) * unit;
    m.ticks = std::move(ticks);
    m.unit = unit;
    return m;
}

void FiniteMetricSpace::check_metric(double tol) const {
    const std::size_t n = size();
    if (dist.size() != n * n) throw std::invalid_argument("metric: matrix has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs((*this)(i, i)) > tol) throw std::invalid_argument("metric: non-zero diagonal at " + labels[i]);
        for (std::size_t j = 0; j < n; ++j) {
            double v = (*this)(i, j);
            if (!std::isfinite(v) || v < -tol) throw std::invalid_argument("metric: negative or non-finite entry");
            if (std::fabs(v - (*this)(j, i)) > tol) throw std::invalid_argument("metric: matrix is not symmetric");
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if ((*this)(i, k) > (*this)(i, j) + (*this)(j, k) + tol)
                    throw std::invalid_argument("metric: triangle inequality fails at (" + labels[i] + ", " +
                                                labels[j] + ", " + labels[k] + ")");
}

FiniteMetricSpace FiniteMetricSpace::subspace(const std::vector<std::size_t>& idx) const {
    FiniteMetricSpace s;
    const std::size_t k = idx.size();
    s.unit = unit;
    s.dist.resize(k * k);
    if (has_exact()) s.ticks.resize(k * k);
    for (std::size_t a = 0; a < k; ++a) {
        if (idx[a] >= size()) throw std::out_of_range("metric: subspace index out of range");
        s.labels.push_back(labels[idx[a]]);
        for (std::size_t b = 0; b < k; ++b) {
            s.dist[a * k + b] = (*this)(idx[a], idx[b]);
            if (has_exact()) s.ticks[a * k + b] = tick(idx[a], idx[b]);
        }
    }
    return s;
}

bool GridPath::has_tick(std::int64_t tick) const {
    if (values.empty()) return false;
    std::int64_t j = (tick - start_tick) * direction();
    return j >= 0 && j < static_cast<std::int64_t>(values.size());
}

double GridPath::at_tick(std::int64_t tick) const {
    if (!has_tick(tick)) throw std::out_of_range("grid path: tick outside sampled range");
    return values[static_cast<std::size_t>((tick - start_tick) * direction())];
}

double GridPath::at_time(double time) const {
    if (values.empty()) throw std::out_of_range("grid path: empty");
    double u = (time / step - static_cast<double>(start_tick)) * static_cast<double>(direction());
    const double last = static_cast<double>(values.size() - 1);
    if (u < -1e-9 || u > last + 1e-9) throw std::out_of_range("grid path: time outside sampled range");
    u = std::clamp(u, 0.0, last);
    auto j = static_cast<std::size_t>(std::floor(u));
    if (j >= values.size() - 1) return values.back();
    double w = u - static_cast<double>(j);
    return values[j] * (1.0 - w) + values[j + 1] * w;
}

namespace {

void require_same_orientation(const GridPath& a, const GridPath& b) {
    if (a.orientation != b.orientation) throw std::invalid_argument("paths have different orientations");
    if (a.orientation == Orientation::none) throw std::invalid_argument("path has no orientation");
}

// Last tick (in the direction of travel) sampled by both paths.
std::int64_t common_end(const GridPath& a, const GridPath& b) {
    return a.direction() > 0 ? std::min(a.end_tick(), b.end_tick()) : std::max(a.end_tick(), b.end_tick());
}

std::int64_t join_start(const GridPath& a, const GridPath& b) {
    return a.direction() > 0 ? std::max(a.start_tick, b.start_tick) : std::min(a.start_tick, b.start_tick);
}

} // namespace

std::optional<std::int64_t> coalescence_tick(const GridPath& a, const GridPath& b, std::int64_t from_tick,
                                             double tol) {
    require_same_orientation(a, b);
    if (!a.has_tick(from_tick) || !b.has_tick(from_tick)) return std::nullopt;
    const std::int64_t dir = a.direction();
    const std::int64_t end = common_end(a, b);
    if ((end - from_tick) * dir < 0) return std::nullopt;
    for (std::int64_t t = end;; t -= dir) {
        if (std::fabs(a.at_tick(t) - b.at_tick(t)) > tol) {
            if (t == end) return std::nullopt;
            return t + dir;
        }
        if (t == from_tick) return from_tick;
    }
}

std::vector<TreeLikeViolation> validate_tree_like(const PathFamily& family, double tol) {
    std::vector<TreeLikeViolation> out;
    const auto& p = family.paths;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].values.empty()) throw std::invalid_argument("validate_tree_like: empty path");
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            require_same_orientation(p[i], p[j]);
            if (p[i].start_tick == p[j].start_tick && std::fabs(p[i].values[0] - p[j].values[0]) <= tol) {
                out.push_back({TreeLikeViolation::Kind::duplicate_start, i, j});
                continue;
            }
            const std::int64_t from = join_start(p[i], p[j]);
            const std::int64_t end = common_end(p[i], p[j]);
            const std::int64_t dir = p[i].direction();
            if (!p[i].has_tick(from) || !p[j].has_tick(from) || (end - from) * dir < 0) {
                out.push_back({TreeLikeViolation::Kind::no_coalescence, i, j});
                continue;
            }
            bool met = false, separated = false;
            for (std::int64_t t = from;; t += dir) {
                bool close = std::fabs(p[i].at_tick(t) - p[j].at_tick(t)) <= tol;
                if (close) met = true;
                else if (met) separated = true;
                if (t == end) break;
            }
            if (separated) out.push_back({TreeLikeViolation::Kind::separated_after_meeting, i, j});
            else if (std::fabs(p[i].at_tick(end) - p[j].at_tick(end)) > tol)
                out.push_back({TreeLikeViolation::Kind::no_coalescence, i, j});
        }
    }
    return out;
}

std::size_t locate_point(const PathFamily& family, double x, std::int64_t tick, double tol) {
    for (std::size_t i = 0; i < family.paths.size(); ++i) {
        const auto& p = family.paths[i];
        if (p.has_tick(tick) && std::fabs(p.at_tick(tick) - x) <= tol) return i;
    }
    throw std::invalid_argument("sample point is not on any path of the family");
}

FiniteMetricSpace ancestor_metric(const PathFamily& family, const std::vector<PathPoint>& points,
                                  std::vector<std::string> labels) {
    const std::size_t n = points.size();
    if (labels.empty())
        for (const auto& pt : points) labels.push_back("p" + std::to_string(pt.path) + "@" + std::to_string(pt.tick));
    if (labels.size() != n) throw std::invalid_argument("ancestor_metric: label count mismatch");
    if (!(family.step > 0.0)) throw std::invalid_argument("ancestor_metric: family step must be positive");
    for (const auto& pt : points) {
        if (pt.path >= family.paths.size()) throw std::invalid_argument("ancestor_metric: unknown path index");
        if (!family.paths[pt.path].has_tick(pt.tick))
            throw std::invalid_argument("ancestor_metric: sample point is not on its path");
    }
    const bool fwd = family.orientation == Orientation::forward;
    std::vector<std::int64_t> ticks(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& a = points[i];
            const auto& b = points[j];
            const std::int64_t from = fwd ? std::max(a.tick, b.tick) : std::min(a.tick, b.tick);
            auto join = coalescence_tick(family.paths[a.path], family.paths[b.path], from);
            if (!join) throw std::runtime_error("ancestor_metric: paths " + std::to_string(a.path) + " and " +
                                                std::to_string(b.path) + " do not coalesce");
            std::int64_t d = fwd ? 2 * *join - a.tick - b.tick : a.tick + b.tick - 2 * *join;
            ticks[i * n + j] = ticks[j * n + i] = d;
        }
    }
    return FiniteMetricSpace::from_ticks(std::move(labels), std::move(ticks), family.step);
}

double path_distance(const GridPath& a, const GridPath& b) {
    require_same_orientation(a, b);
    if (a.values.empty() || b.values.empty()) throw std::invalid_argument("path_distance: empty path");
    // Each path is a function on the whole line: frozen at its start value on
    // the far side of the start, constant beyond its last sample. The weighted
    // gap is then a ratio of piecewise linear functions whose maximum sits at a
    // breakpoint or at t = 0, so those are the only times we need.
    auto clamped = [](const GridPath& p, double t) {
        double lo = p.start_time(), hi = static_cast<double>(p.end_tick()) * p.step;
        if (lo > hi) std::swap(lo, hi);
        return std::tanh(p.at_time(std::clamp(t, lo, hi)));
    };
    std::vector<double> times{0.0};
    for (const GridPath* p : {&a, &b})
        for (std::size_t j = 0; j < p->values.size(); ++j) times.push_back(static_cast<double>(p->tick_at(j)) * p->step);
    double best = std::fabs(std::tanh(a.start_time()) - std::tanh(b.start_time()));
    for (double t : times) best = std::max(best, std::fabs(clamped(a, t) - clamped(b, t)) / (1.0 + std::fabs(t)));
    return best;
}

FourPointReport four_point_report(const FiniteMetricSpace& x, double tol) {
    FourPointReport r;
    const std::size_t n = x.size();
    const bool exact = x.has_exact();
    // exact path: compare integer sums, tolerance converted to ticks
    const double tol_ticks = exact ? tol / x.unit : 0.0;
    auto sorted_gap = [](auto s1, auto s2, auto s3) {
        if (s1 < s2) std::swap(s1, s2);
        if (s2 < s3) std::swap(s2, s3);
        if (s1 < s2) std::swap(s1, s2);
        return s1 - s2;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            for (std::size_t k = j; k < n; ++k)
                for (std::size_t l = k; l < n; ++l) {
                    double excess;
                    bool bad;
                    if (exact) {
                        std::int64_t g = sorted_gap(x.tick(i, j) + x.tick(k, l), x.tick(i, k) + x.tick(j, l),
                                                    x.tick(i, l) + x.tick(j, k));
                        excess = static_cast<double>(g) * x.unit;
                        bad = static_cast<double>(g) > tol_ticks;
                    } else {
                        excess = sorted_gap(x(i, j) + x(k, l), x(i, k) + x(j, l), x(i, l) + x(j, k));
                        bad = excess > tol;
                    }
                    if (excess > r.worst_excess) {
                        r.worst_excess = excess;
                        r.worst = {i, j, k, l};
                    }
                    if (bad) r.ok = false;
                }
    return r;
}

void write_metric_csv(std::ostream& os, const FiniteMetricSpace& m) {
    os << "schema," << kMetricSchema << "\nlabel";
    for (const auto& l : m.labels) {
        if (l.find_first_of(",\n\r") != std::string::npos)
            throw std::invalid_argument("metric csv: label contains a separator: " + l);
        os << ',' << l;
    }
    os << '\n';
    char buf[40];
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << m.labels[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            os << ',' << buf;
        }
        os << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

FiniteMetricSpace read_metric_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("metric csv: empty input");
    auto head = split_csv_line(line);
    if (head.size() != 2 || head[0] != "schema" || head[1] != kMetricSchema)
        throw std::invalid_argument("metric csv: missing or unsupported schema line");
    if (!std::getline(is, line)) throw std::invalid_argument("metric csv: missing label line");
    auto labels = split_csv_line(line);
    if (labels.empty() || labels[0] != "label") throw std::invalid_argument("metric csv: bad label line");
    labels.erase(labels.begin());
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != labels.size() + 1) throw std::invalid_argument("metric csv: ragged row");
        if (rows.size() == labels.size()) throw std::invalid_argument("metric csv: too many rows");
        if (cells[0] != labels[rows.size()]) throw std::invalid_argument("metric csv: row label out of order");
        std::vector<double> r;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            try {
                r.push_back(std::stod(cells[k]));
            } catch (const std::exception&) {
                throw std::invalid_argument("metric csv: bad number '" + cells[k] + "'");
            }
        }
        rows.push_back(std::move(r));
    }
    auto m = FiniteMetricSpace::from_rows(std::move(labels), rows);
    m.check_metric(1e-9);
    return m;
}

} // namespace drainage
