#include "vkrod/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vkrod {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t z = splitmix64(splitmix64(seed) ^ splitmix64(counter * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL));
    return ((z >> 11) + 0.5) * 0x1.0p-53; // strictly inside (0,1)
}

bool ratio_is_rational(double a, double b, double tol, long max_den) {
    if (b == 0.0) return true;
    double x = std::abs(a / b);
    // Continued-fraction convergents p/q of x with q <= max_den.
    double frac = x;
    long p_prev = 1, q_prev = 0, p = (long)std::floor(frac), q = 1;
    for (int it = 0; it < 64; ++it) {
        if (std::abs(x - (double)p / (double)q) <= tol) return true;
        frac -= std::floor(frac);
        if (frac < 1e-18) break;
        frac = 1.0 / frac;
        const long ai = (long)std::floor(frac);
        const long p_next = ai * p + p_prev;
        const long q_next = ai * q + q_prev;
        if (q_next > max_den || q_next <= 0) break;
        p_prev = p; q_prev = q; p = p_next; q = q_next;
    }
    return std::abs(x - (double)p / (double)q) <= tol;
}

namespace {

void validate(const MicrostructureSpec& spec) {
    if (spec.phases.empty())
        throw std::invalid_argument("microstructure: need at least one phase");
    switch (spec.kind) {
    case MicrostructureKind::Periodic: {
        if (spec.layout.empty())
            throw std::invalid_argument("microstructure: periodic layout is empty");
        double total = 0.0;
        for (const auto& [idx, frac] : spec.layout) {
            if (idx < 0 || idx >= (int)spec.phases.size())
                throw std::invalid_argument("microstructure: layout phase index out of range");
            if (!(frac > 0.0))
                throw std::invalid_argument("microstructure: volume fractions must be positive");
            total += frac;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("microstructure: volume fractions must sum to 1");
        break;
    }
    case MicrostructureKind::Quasiperiodic: {
        if (spec.phases.size() != 2)
            throw std::invalid_argument("microstructure: quasiperiodic layout needs exactly 2 phases");
        if (!(spec.f1 > 0.0) || !(spec.f2 > 0.0))
            throw std::invalid_argument("microstructure: frequencies must be positive");
        if (ratio_is_rational(spec.f1, spec.f2))
            throw std::invalid_argument("microstructure: quasiperiodic frequency ratio must be irrational");
        break;
    }
    case MicrostructureKind::Renewal: {
        if (spec.mean_lengths.size() != spec.phases.size())
            throw std::invalid_argument("microstructure: renewal needs one mean length per phase");
        for (double m : spec.mean_lengths)
            if (!(m > 0.0))
                throw std::invalid_argument("microstructure: mean segment lengths must be positive");
        break;
    }
    }
}

double quasi_value(const MicrostructureSpec& spec, double s) {
    return std::cos(2.0 * M_PI * spec.f1 * s) + std::cos(2.0 * M_PI * spec.f2 * s);
}

} // namespace

MicrostructureRealization::MicrostructureRealization(MicrostructureSpec spec)
    : spec_(std::move(spec)) {
    validate(spec_);
    if (spec_.kind == MicrostructureKind::Periodic) {
        cum_fractions_.push_back(0.0);
        for (const auto& [idx, frac] : spec_.layout)
            cum_fractions_.push_back(cum_fractions_.back() + frac);
        cum_fractions_.back() = 1.0;
    }
}

MicrostructureRealization realize(const MicrostructureSpec& spec) {
    return MicrostructureRealization(spec);
}

double MicrostructureRealization::renewal_length(std::int64_t index) const {
    // Zigzag map Z -> N keeps backward extension deterministic too.
    const std::uint64_t counter = index >= 0 ? 2ULL * (std::uint64_t)index
                                             : 2ULL * (std::uint64_t)(-index) - 1ULL;
    const int nphases = (int)spec_.phases.size();
    const int phase = (int)(((index % nphases) + nphases) % nphases);
    const double u = uniform01(spec_.seed, counter);
    return -spec_.mean_lengths[phase] * std::log1p(-u);
}

void MicrostructureRealization::extend_forward(double s) const {
    double last = fwd_.empty() ? 0.0 : fwd_.back();
    while (last <= s) {
        last += renewal_length((std::int64_t)fwd_.size());
        fwd_.push_back(last);
    }
}

void MicrostructureRealization::extend_backward(double s) const {
    double first = bwd_.empty() ? 0.0 : bwd_.back();
    while (first > s) {
        first -= renewal_length(-(std::int64_t)bwd_.size() - 1);
        bwd_.push_back(first);
    }
}

int MicrostructureRealization::renewal_segment_index(double s) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (s >= 0.0) {
        extend_forward(s);
        // fwd_[k] = right end of segment k; want the first k with s < fwd_[k].
        const auto it = std::upper_bound(fwd_.begin(), fwd_.end(), s);
        return (int)(it - fwd_.begin());
    }
    extend_backward(s);
    // bwd_[k] = left end of segment -(k+1).
    const auto it = std::lower_bound(bwd_.begin(), bwd_.end(), s, std::greater<double>());
    return -(int)(it - bwd_.begin()) - 1;
}

int MicrostructureRealization::phase_at(double s) const {
    switch (spec_.kind) {
    case MicrostructureKind::Periodic: {
        double frac = s - std::floor(s);
        const auto it = std::upper_bound(cum_fractions_.begin(), cum_fractions_.end(), frac);
        int cell = (int)(it - cum_fractions_.begin()) - 1;
        cell = std::clamp(cell, 0, (int)spec_.layout.size() - 1);
        return spec_.layout[cell].first;
    }
    case MicrostructureKind::Quasiperiodic:
        return quasi_value(spec_, s) >= spec_.threshold ? 1 : 0;
    case MicrostructureKind::Renewal: {
        const int nphases = (int)spec_.phases.size();
        const std::int64_t idx = renewal_segment_index(s);
        return (int)(((idx % nphases) + nphases) % nphases);
    }
    }
    return 0;
}

std::vector<Segment> MicrostructureRealization::segments_in(double a, double b) const {
    std::vector<Segment> out;
    if (!(b > a)) return out;
    switch (spec_.kind) {
    case MicrostructureKind::Periodic: {
        const int ncells = (int)spec_.layout.size();
        // Walk cell boundaries k + cum_fractions_ across [a, b).
        double base = std::floor(a);
        int cell = 0;
        {
            const double frac = a - base;
            const auto it = std::upper_bound(cum_fractions_.begin(), cum_fractions_.end(), frac);
            cell = std::clamp((int)(it - cum_fractions_.begin()) - 1, 0, ncells - 1);
        }
        double left = a;
        while (left < b) {
            const double right = std::min(b, base + cum_fractions_[cell + 1]);
            if (right > left)
                out.push_back({left, right, spec_.layout[cell].first});
            left = right;
            if (++cell == ncells) {
                cell = 0;
                base += 1.0;
            }
        }
        break;
    }
    case MicrostructureKind::Quasiperiodic: {
        // Sign changes of cos(2 pi f1 s) + cos(2 pi f2 s) - threshold located by
        // sampling and bisection. Tangential crossings below the sampling
        // resolution are ignored; they carry no measure.
        const double step = 0.05 / (spec_.f1 + spec_.f2);
        double left = a;
        int phase = phase_at(a);
        double s_prev = a;
        double v_prev = quasi_value(spec_, a) - spec_.threshold;
        while (s_prev < b) {
            double s_next = std::min(b, s_prev + step);
            double v_next = quasi_value(spec_, s_next) - spec_.threshold;
            if ((v_prev >= 0.0) != (v_next >= 0.0)) {
                double lo = s_prev, hi = s_next;
                for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((quasi_value(spec_, mid) - spec_.threshold >= 0.0) == (v_prev >= 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                out.push_back({left, hi, phase});
                left = hi;
                phase = 1 - phase;
            }
            s_prev = s_next;
            v_prev = v_next;
        }
        out.push_back({left, b, phase});
        break;
    }
    case MicrostructureKind::Renewal: {
        const int nphases = (int)spec_.phases.size();
        std::int64_t idx = renewal_segment_index(a);
        double left = a;
        while (left < b) {
            double right;
            {
                std::lock_guard<std::mutex> lock(cache_mutex_);
                extend_forward(std::max(left, 0.0));
                right = idx >= 0 ? fwd_[(size_t)idx]
                                 : (idx == -1 ? 0.0 : bwd_[(size_t)(-idx) - 2]);
            }
            right = std::min(right, b);
            if (right > left)
                out.push_back({left, right, (int)(((idx % nphases) + nphases) % nphases)});
            left = right;
            ++idx;
        }
        break;
    }
    }
    return out;
}

double MicrostructureRealization::birkhoff_average(const std::vector<double>& g, double T) const {
    if (!(T > 0.0))
        throw std::invalid_argument("birkhoff_average: window length must be positive");
    if (g.size() != spec_.phases.size())
        throw std::invalid_argument("birkhoff_average: need one value per phase");
    double acc = 0.0;
    for (const auto& seg : segments_in(0.0, T))
        acc += g[seg.phase] * (seg.end - seg.begin);
    return acc / T;
}

double MicrostructureRealization::ensemble_mean(const std::vector<double>& g) const {
    if (g.size() != spec_.phases.size())
        throw std::invalid_argument("ensemble_mean: need one value per phase");
    switch (spec_.kind) {
    case MicrostructureKind::Periodic: {
        double acc = 0.0;
        for (const auto& [idx, frac] : spec_.layout)
            acc += g[idx] * frac;
        return acc;
    }
    case MicrostructureKind::Renewal: {
        double num = 0.0, den = 0.0;
        for (size_t p = 0; p < g.size(); ++p) {
            num += g[p] * spec_.mean_lengths[p];
            den += spec_.mean_lengths[p];
        }
        return num / den;
    }
    case MicrostructureKind::Quasiperiodic: {
        // Fraction of the torus where cos(2 pi t1) + cos(2 pi t2) >= threshold,
        // reduced to a 1D integral of arccos and evaluated by composite Simpson.
        const int n = 40000; // even
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t1 = (double)i / n;
            const double c = spec_.threshold - std::cos(2.0 * M_PI * t1);
            double frac1;
            if (c <= -1.0) frac1 = 1.0;
            else if (c >= 1.0) frac1 = 0.0;
            else frac1 = std::acos(c) / M_PI;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * frac1;
        }
        const double frac_phase1 = acc / (3.0 * n);
        return g[0] * (1.0 - frac_phase1) + g[1] * frac_phase1;
    }
    }
    return 0.0;
}

} // namespace vkrod
