#pragma once

// Nonparametric bootstrap of the certification functionals: every setting
// (and every (x, do_a) column) is resampled multinomially at its own total.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tpm/certify.hpp"
#include "tpm/counts.hpp"
#include "tpm/errors.hpp"

namespace tpm {

inline constexpr std::size_t kDefaultResamples = 10000;

struct BootstrapOptions {
    std::size_t resamples = kDefaultResamples;
    std::uint64_t seed = 0;
    /// Keep the argmin of the observed Gamma in every resample instead of
    /// re-selecting it.
    bool frozen_argmin = false;
};

namespace detail {

inline double sample_std(const std::vector<double> &v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline CountTable resample_table(const CountTable &t, std::mt19937_64 &rng) {
    CountTable out = t;
    for (std::size_t x = 0; x < t.settings.size(); ++x) {
        const auto &c = t.counts[x];
        if (t.kind == CountKind::observational) {
            const double n = static_cast<double>(t.setting_total(x));
            const auto draw = sample_multinomial<4>(
                t.setting_total(x), {c[0][0] / n, c[0][1] / n, c[1][0] / n, c[1][1] / n}, rng);
            out.counts[x] = {{{draw[0], draw[1]}, {draw[2], draw[3]}}};
        } else {
            for (int a = 0; a < 2; ++a) {
                const std::uint64_t total = c[a][0] + c[a][1];
                const double n = static_cast<double>(total);
                const auto draw = sample_multinomial<2>(total, {c[a][0] / n, c[a][1] / n}, rng);
                out.counts[x][a] = {draw[0], draw[1]};
            }
        }
    }
    return out;
}

}  // namespace detail

/// Standard errors of Gamma, Delta and (when `interventional` is given) ACDE.
/// Resample r draws from a generator seeded with splitmix64(seed + r), so
/// results are deterministic and independent of evaluation order.
inline StdErrors bootstrap_errors(const CountTable &observational, const CountTable *interventional,
                                  const BootstrapOptions &opt) {
    if (observational.kind != CountKind::observational) {
        throw ValidationError("bootstrap_errors: observational table expected");
    }
    observational.validate();
    if (interventional) {
        if (interventional->kind != CountKind::interventional) {
            throw ValidationError("bootstrap_errors: interventional table expected");
        }
        interventional->validate();
    }
    if (opt.resamples < 2) throw ValidationError("bootstrap_errors: at least two resamples required");

    const ArgminMap frozen = gamma_functional(counts_to_behavior(observational)).argmin;
    std::vector<double> gammas, deltas, acdes;
    gammas.reserve(opt.resamples);
    deltas.reserve(opt.resamples);
    for (std::size_t r = 0; r < opt.resamples; ++r) {
        std::mt19937_64 rng(splitmix64(opt.seed + r));
        const Behavior b = counts_to_behavior(detail::resample_table(observational, rng));
        gammas.push_back(opt.frozen_argmin ? gamma_at(b, frozen) : gamma_functional(b).value);
        deltas.push_back(pearl_delta(b));
        if (interventional) acdes.push_back(acde(counts_to_do_table(detail::resample_table(*interventional, rng))));
    }
    StdErrors se;
    se.gamma = detail::sample_std(gammas);
    se.pearl_delta = detail::sample_std(deltas);
    if (interventional) se.acde = detail::sample_std(acdes);
    return se;
}

}  // namespace tpm
