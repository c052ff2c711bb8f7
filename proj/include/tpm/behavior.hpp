#pragma once

// Observable statistics of a two-point measurement experiment with binary
// outcomes: the only objects the certification layer consumes.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpm/errors.hpp"

namespace tpm {

/// cell[a][b]
using OutcomeTable = std::array<std::array<double, 2>, 2>;

inline constexpr double kProbabilityTol = 1e-9;

/// P(a, b | x) for a finite, ordered setting alphabet.
struct Behavior {
    std::vector<std::string> settings;
    std::vector<OutcomeTable> probs;  // probs[x][a][b]
    std::optional<std::vector<std::uint64_t>> shots;

    std::size_t num_settings() const { return settings.size(); }
    double operator()(std::size_t x, int a, int b) const { return probs[x][a][b]; }

    void validate() const {
        if (settings.empty()) throw ValidationError("Behavior: empty setting alphabet");
        if (probs.size() != settings.size()) throw ValidationError("Behavior: probs/settings size mismatch");
        if (shots && shots->size() != settings.size()) throw ValidationError("Behavior: shots/settings size mismatch");
        for (std::size_t x = 0; x < probs.size(); ++x) {
            double sum = 0.0;
            for (const auto &row : probs[x]) {
                for (double p : row) {
                    if (!std::isfinite(p) || p < -kProbabilityTol) {
                        throw ValidationError("Behavior: negative or non-finite probability at setting " + settings[x]);
                    }
                    sum += p;
                }
            }
            if (std::abs(sum - 1.0) > kProbabilityTol) {
                throw ValidationError("Behavior: setting " + settings[x] + " is not normalized");
            }
        }
    }
};

/// P(B = b | do(A = a, X = x)). When `settings` is empty the table carries no
/// x index and `probs` holds a single entry.
struct DoTable {
    std::vector<std::string> settings;
    std::vector<OutcomeTable> probs;  // probs[x][a][b]
    std::optional<std::vector<std::array<std::uint64_t, 2>>> shots;  // shots[x][a]

    bool x_indexed() const { return !settings.empty(); }
    std::size_t num_columns() const { return probs.size(); }
    double operator()(std::size_t x, int a, int b) const { return probs[x][a][b]; }

    void validate() const {
        const std::size_t expected = x_indexed() ? settings.size() : 1;
        if (probs.size() != expected) throw ValidationError("DoTable: probs/settings size mismatch");
        for (const auto &col : probs) {
            for (const auto &row : col) {
                if (!std::isfinite(row[0]) || !std::isfinite(row[1]) || row[0] < -kProbabilityTol ||
                    row[1] < -kProbabilityTol) {
                    throw ValidationError("DoTable: negative or non-finite probability");
                }
                if (std::abs(row[0] + row[1] - 1.0) > kProbabilityTol) {
                    throw ValidationError("DoTable: P(b | do(a, x)) is not normalized");
                }
            }
        }
    }
};

}  // namespace tpm
