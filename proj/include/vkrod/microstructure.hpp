#ifndef VKROD_MICROSTRUCTURE_HH
#define VKROD_MICROSTRUCTURE_HH

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "vkrod/material.hpp"

namespace vkrod {

enum class MicrostructureKind { Periodic, Quasiperiodic, Renewal };

// Axial phase layout along the (scaled) rod axis. One realization stands for
// one typical trajectory s |-> T_s of the underlying dynamical system.
struct MicrostructureSpec {
    MicrostructureKind kind = MicrostructureKind::Periodic;
    std::vector<ElasticityTensor> phases;

    // periodic: (phase index, volume fraction) laid out in order in the unit cell
    std::vector<std::pair<int, double>> layout;

    // quasiperiodic: phase 1 where cos(2 pi f1 s) + cos(2 pi f2 s) >= threshold
    double f1 = 1.0;
    double f2 = 1.41421356237309515;
    double threshold = 0.0;

    // renewal: cyclic phases with exponential segment lengths of these means
    std::vector<double> mean_lengths;

    std::uint64_t seed = 0;
};

struct Segment {
    double begin;
    double end;
    int phase;
};

class MicrostructureRealization {
public:
    explicit MicrostructureRealization(MicrostructureSpec spec);

    const MicrostructureSpec& spec() const { return spec_; }
    int phase_count() const { return (int)spec_.phases.size(); }
    const ElasticityTensor& phase_tensor(int p) const { return spec_.phases[p]; }

    // Deterministic in (spec, seed, s); periodic case has exact period 1.
    int phase_at(double s) const;

    // Maximal constant-phase intervals covering [a, b), in order.
    std::vector<Segment> segments_in(double a, double b) const;

    // (1/T) int_0^T g(phase(s)) ds by exact segment-wise integration.
    double birkhoff_average(const std::vector<double>& g, double T) const;

    // Expectation of g under the invariant measure. Periodic/renewal are in
    // closed form; the quasiperiodic value is the torus area fraction,
    // computed by 1D quadrature of the arccos reduction.
    double ensemble_mean(const std::vector<double>& g) const;

private:
    int renewal_segment_index(double s) const;
    double renewal_length(std::int64_t index) const;
    void extend_forward(double s) const;
    void extend_backward(double s) const;

    MicrostructureSpec spec_;
    std::vector<double> cum_fractions_; // periodic cell boundaries

    // Renewal boundary cache: fwd_[k] = b_{k+1} > 0, bwd_[k] = b_{-k-1} < 0.
    // Lengths are counter-based in the segment index, so lazy extension is
    // idempotent and order-independent.
    mutable std::mutex cache_mutex_;
    mutable std::vector<double> fwd_;
    mutable std::vector<double> bwd_;
};

MicrostructureRealization realize(const MicrostructureSpec& spec);

// True if a/b is within tol of a rational with denominator <= max_den
// (continued-fraction convergents).
bool ratio_is_rational(double a, double b, double tol = 1e-12, long max_den = 10000);

// Counter-based generator: the i-th draw depends only on (seed, i).
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t counter);

} // namespace vkrod

#endif
