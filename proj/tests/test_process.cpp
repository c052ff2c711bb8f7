#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tpm/process.hpp"
#include "tpm/proclib.hpp"

using namespace tpm;

namespace {

MpInstrument random_instrument(std::mt19937_64 &rng, std::size_t settings) {
    MpInstrument inst;
    for (std::size_t x = 0; x < settings; ++x) {
        inst.settings.push_back("s" + std::to_string(x));
        const auto p = oracle::random_binary_povm(rng);
        inst.povm.push_back({p[0], p[1]});
    }
    inst.repreparations = {oracle::random_density(rng, 2), oracle::random_density(rng, 2)};
    return inst;
}

}  // namespace

TEST(BuildProcess, MatchesIndexSumContraction) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix rho = oracle::random_density(rng, 4);
        const ComplexMatrix u = oracle::random_unitary(rng, 4);
        EXPECT_LT(max_abs_diff(build_process(rho, u).w(), oracle::index_sum_process(rho, u)), 1e-13);
    }
}

TEST(BuildProcess, RandomProcessesAreValid) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = build_process(oracle::random_density(rng, 4), oracle::random_unitary(rng, 4));
        EXPECT_TRUE(validate_process(p).empty());
        EXPECT_NEAR(real_trace(p.w()), 2.0, 1e-12);
    }
}

TEST(BuildProcess, RejectsInvalidInputs) {
    EXPECT_THROW(build_process(bell_state(), 2.0 * swap_gate()), ValidationError);
    EXPECT_THROW(build_process(2.0 * bell_state(), swap_gate()), ValidationError);
    EXPECT_THROW(build_process(qubit::identity() / 2.0, swap_gate()), DimensionError);
}

TEST(BornRule, EqualsSequentialSimulation) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        const ComplexMatrix rho = oracle::random_density(rng, 4);
        const ComplexMatrix u = oracle::random_unitary(rng, 4);
        const MpInstrument inst = random_instrument(rng, 3);
        const auto fp = oracle::random_binary_povm(rng);
        const BinaryPovm f = {fp[0], fp[1]};
        const Behavior b = born_rule(build_process(rho, u), inst, f);
        for (std::size_t x = 0; x < 3; ++x)
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb) {
                    const double ref =
                        oracle::sequential_probability(rho, u, inst.povm[x][a], inst.repreparations[a], f[bb]);
                    EXPECT_NEAR(b(x, a, bb), ref, 1e-12);
                }
        EXPECT_NO_THROW(b.validate());
    }
}

TEST(DoProbabilities, EqualsSequentialSimulation) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const ComplexMatrix rho = oracle::random_density(rng, 4);
        const ComplexMatrix u = oracle::random_unitary(rng, 4);
        const std::array<ComplexMatrix, 2> reps = {oracle::random_density(rng, 2), oracle::random_density(rng, 2)};
        const auto fp = oracle::random_binary_povm(rng);
        const DoTable d = do_probabilities(build_process(rho, u), reps, {fp[0], fp[1]});
        EXPECT_FALSE(d.x_indexed());
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb) {
                EXPECT_NEAR(d(0, a, bb), oracle::sequential_do_probability(rho, u, reps[a], fp[bb]), 1e-12);
            }
    }
}

TEST(BornRule, CommonCauseBellStatePerfectlyCorrelatesZ) {
    // SWAP routes the memory straight to B: a common-cause process.
    const auto p = build_process(bell_state(), swap_gate());
    MpInstrument inst;
    inst.settings = {"Z"};
    inst.povm = {observable_povm({0, 0, 1})};
    inst.repreparations = {qubit::bloch_state({1, 0, 0}), qubit::bloch_state({0, 1, 0})};
    const Behavior b = born_rule(p, inst, observable_povm({0, 0, 1}));
    EXPECT_NEAR(b(0, 0, 0), 0.5, 1e-12);
    EXPECT_NEAR(b(0, 1, 1), 0.5, 1e-12);
    EXPECT_NEAR(b(0, 0, 1), 0.0, 1e-12);
    EXPECT_NEAR(b(0, 1, 0), 0.0, 1e-12);
}

TEST(DoProbabilities, CommonCauseIgnoresPreparation) {
    std::mt19937_64 rng(14);
    const ComplexMatrix rho = oracle::random_density(rng, 4);
    const auto p = build_process(rho, swap_gate());
    const DoTable d = do_probabilities(p, {qubit::bloch_state({0, 0, 1}), qubit::bloch_state({0, 0, -1})},
                                       observable_povm({0.6, 0, 0.8}));
    EXPECT_NEAR(d(0, 0, 0), d(0, 1, 0), 1e-12);
}

TEST(ValidateProcess, ReportsBrokenInvariants) {
    const ProcessOperator good = build_process(bell_state(), memory_test_unitary());
    EXPECT_TRUE(validate_process(good).empty());

    const auto scaled = ProcessOperator::from_matrix(2.0 * good.w());
    const auto issues = validate_process(scaled);
    ASSERT_FALSE(issues.empty());
    EXPECT_EQ(issues.front().rfind("trace", 0), 0u);

    ComplexMatrix skew = good.w();
    skew(0, 1) += Complex(0.0, 0.3);
    EXPECT_EQ(validate_process(ProcessOperator::from_matrix(skew)).front().rfind("hermiticity", 0), 0u);

    // Signaling from B back to A': Tr_B W no longer of the form rho (x) id.
    ComplexMatrix sig = good.w();
    sig += 0.1 * kron({qubit::pauli_z(), qubit::pauli_z(), qubit::identity()});
    bool marginal = false;
    for (const auto &s : validate_process(ProcessOperator::from_matrix(sig))) marginal |= s.rfind("marginal", 0) == 0;
    EXPECT_TRUE(marginal);

    EXPECT_THROW(ProcessOperator::from_matrix(ComplexMatrix::Identity(4, 4)), DimensionError);
}

TEST(ObservablePovm, OutcomeZeroIsPlusOneEigenvalue) {
    const BinaryPovm z = observable_povm({0, 0, 1});
    EXPECT_NEAR(z[0](0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(z[1](1, 1).real(), 1.0, 1e-15);
}
