#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "tpm/tpm.hpp"

using namespace tpm;
namespace fs = std::filesystem;

namespace {

const double kBound = 2.0 - std::sqrt(2.0);
const std::string kSource = TPM_SOURCE_DIR;
const std::string kCli = TPM_CLI_PATH;

CountTable parse_text(const std::string &text) {
    std::istringstream in(text);
    return parse_counts(in);
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch_dir(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("tpm_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string &args, const fs::path &log) {
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig preset(const std::string &name) { return parse_config(preset_document(name)); }

}  // namespace

TEST(ParseCounts, SumsDuplicatesAndKeepsFirstAppearanceOrder) {
    const auto t = parse_text("x,a,b,count\nZ,0,0,3\nX,0,0,1\nZ,0,0,2\nZ,1,1,5\nX,1,0,4\n");
    EXPECT_EQ(t.kind, CountKind::observational);
    EXPECT_EQ(t.settings, (std::vector<std::string>{"Z", "X"}));
    EXPECT_EQ(t.counts[0][0][0], 5u);
    EXPECT_EQ(t.counts[0][1][1], 5u);
    EXPECT_EQ(t.setting_total(1), 5u);
}

TEST(ParseCounts, ToleratesWhitespaceAndBlankLines) {
    const auto t = parse_text(" do_a , x , b , count \r\n\n0, X ,1, 7\r\n1,X,0,3\n");
    EXPECT_EQ(t.kind, CountKind::interventional);
    EXPECT_EQ(t.counts[0][0][1], 7u);
    EXPECT_EQ(t.counts[0][1][0], 3u);
}

TEST(ParseCounts, ErrorsCarryTheRow) {
    try {
        parse_text("x,a,b,count\nX,0,0,10\nX,0,1,-3\n");
        FAIL() << "negative count accepted";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.row, 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_THROW(parse_text("setting,a,b,n\nX,0,0,1\n"), ParseError);
    EXPECT_THROW(parse_text("x,a,b,count\nX,2,0,1\n"), ParseError);
    EXPECT_THROW(parse_text("x,a,b,count\nX,0,0\n"), ParseError);
    EXPECT_THROW(parse_text("x,a,b,count\nX,0,0,1.5\n"), ParseError);
    EXPECT_THROW(parse_text(""), ParseError);
}

TEST(ParseCounts, ZeroShotSettingIsAValidationError) {
    try {
        parse_text("x,a,b,count\nX,0,0,0\nX,1,1,0\n");
        FAIL() << "zero-shot setting accepted";
    } catch (const ParseError &) {
        FAIL() << "zero shots must not be a parse error";
    } catch (const ValidationError &) {
    }
}

TEST(ParseCounts, FourSettingTableHasSixteenRows) {
    std::mt19937_64 rng(60);
    const ExperimentSetup s = memory_test_setup();
    const CountTable t = sample_counts(born_rule(setup_process(s), s.instrument, s.final_measurement), 10000, rng);
    std::ostringstream os;
    write_counts(os, t);
    const auto back = parse_text(os.str());
    EXPECT_EQ(back.num_rows(), 16u);
    EXPECT_EQ(back.settings, t.settings);
    EXPECT_EQ(back.counts, t.counts);
    for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(back.setting_total(x), 10000u);
}

TEST(CountsToBehavior, ExactFrequenciesWithoutSmoothing) {
    const auto b = counts_to_behavior(parse_text("x,a,b,count\nX,0,0,5000\nX,0,1,5000\nX,1,0,0\nX,1,1,0\n"));
    EXPECT_EQ(b(0, 0, 0), 0.5);
    EXPECT_EQ(b(0, 0, 1), 0.5);
    EXPECT_EQ(b(0, 1, 0), 0.0);
    EXPECT_EQ(b(0, 1, 1), 0.0);
    EXPECT_EQ(b.shots->front(), 10000u);
}

TEST(CountsToDoTable, NormalizesPerPreparationAndSetting) {
    const auto d = counts_to_do_table(parse_text("do_a,x,b,count\n0,X,0,30\n0,X,1,10\n1,X,0,1\n1,X,1,4\n"));
    EXPECT_TRUE(d.x_indexed());
    EXPECT_EQ(d(0, 0, 0), 0.75);
    EXPECT_EQ(d(0, 1, 1), 0.8);
    EXPECT_THROW(counts_to_behavior(parse_text("do_a,x,b,count\n0,X,0,1\n1,X,0,1\n")), ValidationError);
}

TEST(CountsRoundTrip, DyadicStatisticsAreReproducedExactly) {
    Behavior b;
    b.settings = {"p", "q"};
    b.probs = {{{{0.5, 0.25}, {0.125, 0.125}}}, {{{0.0, 0.75}, {0.25, 0.0}}}};
    CountTable t;
    t.settings = b.settings;
    for (const auto &p : b.probs) {
        CountCell c{};
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb) c[a][bb] = static_cast<std::uint64_t>(p[a][bb] * 4096);
        t.counts.push_back(c);
    }
    std::ostringstream os;
    write_counts(os, t);
    EXPECT_EQ(counts_to_behavior(parse_text(os.str())).probs, b.probs);
}

TEST(CountsRoundTrip, ResampledTablesDifferOnlyByNoise) {
    const ExperimentSetup s = memory_test_setup();
    const Behavior exact = born_rule(setup_process(s), s.instrument, s.final_measurement);
    std::mt19937_64 rng(61);
    const Behavior first = counts_to_behavior(sample_counts(exact, 100000, rng));
    const Behavior second = counts_to_behavior(sample_counts(first, 100000, rng));
    for (std::size_t x = 0; x < 4; ++x)
        for (int a = 0; a < 2; ++a)
            for (int bb = 0; bb < 2; ++bb) {
                const double p = first(x, a, bb);
                EXPECT_NEAR(second(x, a, bb), p, 5.0 * std::sqrt(p * (1 - p) / 100000) + 1e-12);
            }
}

TEST(Fixtures, ReproduceTheQuotedCentralValues) {
    const CountTable obs = ingest_counts(kSource + "/data/fixtures/observational.csv");
    const CountTable dos = ingest_counts(kSource + "/data/fixtures/interventional.csv");
    const Behavior b = counts_to_behavior(obs);
    EXPECT_EQ(obs.num_rows(), 16u);
    EXPECT_NEAR(gamma_functional(b).value, 0.642, 1e-12);
    EXPECT_NEAR(pearl_delta(b), 0.883, 1e-12);
    EXPECT_NEAR(acde(counts_to_do_table(dos)), 0.0325, 1e-12);
    const auto se = bootstrap_errors(obs, &dos, {2000, 42, false});
    EXPECT_GT(*se.gamma, 0.005);
    EXPECT_LT(*se.gamma, 0.06);
}

TEST(Fixtures, IngestErrorsNameTheFile) {
    const fs::path dir = scratch_dir("ingest");
    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "x,a,b,count\nX,0,0,1\nX,0,1,-1\n";
    try {
        ingest_counts(bad.string());
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.row, 3u);
        EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos);
    }
    EXPECT_THROW(ingest_counts((dir / "missing.csv").string()), ValidationError);
}

TEST(Report, JsonRoundTrip) {
    const CountTable obs = ingest_counts(kSource + "/data/fixtures/observational.csv");
    const CountTable dos = ingest_counts(kSource + "/data/fixtures/interventional.csv");
    const Behavior b = counts_to_behavior(obs);
    const DoTable d = counts_to_do_table(dos);
    CertOptions opt;
    opt.std_errors = bootstrap_errors(obs, &dos, {500, 3, false});
    opt.seed = 3;
    opt.resamples = 500;
    const CertReport r = certify(b, &d, opt);
    const auto j = report_to_json(r);
    const CertReport back = report_from_json(ordered_json::parse(j.dump(2)));
    EXPECT_EQ(report_to_json(back), j);
    EXPECT_EQ(back.gamma, r.gamma);
    EXPECT_EQ(back.std_errors->acde, r.std_errors->acde);

    std::vector<std::string> keys;
    for (const auto &[k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"gamma", "gamma_stderr", "pearl_delta", "acde", "chsh", "fidelity_lb",
                                              "verdict_nonclassical", "verdict_crosstalk_witnessed", "argmin", "seed",
                                              "resamples", "sigma_k", "std_errors"}));
}

TEST(Report, NullsForMissingFields) {
    Behavior b;
    b.settings = {"only"};
    b.probs = {{{{0.25, 0.25}, {0.25, 0.25}}}};
    const auto j = report_to_json(certify(b));
    EXPECT_TRUE(j.at("acde").is_null());
    EXPECT_TRUE(j.at("chsh").is_null());
    EXPECT_TRUE(j.at("gamma_stderr").is_null());
    EXPECT_TRUE(j.at("seed").is_null());
    EXPECT_EQ(report_to_json(report_from_json(j)), j);
}

TEST(Report, CurveCsvUsesShortestRoundTripNumbers) {
    std::ostringstream os;
    write_curve_csv(os, {{0.0, 0.1, 0.0}, {1.5, 2.0 - std::sqrt(2.0), 0.25}});
    EXPECT_EQ(os.str(), "abscissa,value,stderr_lo,stderr_hi\n0,0.1,0.1,0.1\n1.5,0.5857864376269049,"
                        "0.33578643762690485,0.8357864376269049\n");
    for (double v : {0.1, 1.0 / 3.0, 64.39302961222299, 1e-300, -2.5}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Report, EmitWritesIntoNestedDirectories) {
    const fs::path dir = scratch_dir("emit") / "a" / "b";
    const auto written = emit_report(std::nullopt, {{"curve", {{0.0, 1.0, 0.0}}}}, dir);
    ASSERT_EQ(written.size(), 1u);
    EXPECT_EQ(slurp(dir / "curve.csv"), "abscissa,value,stderr_lo,stderr_hi\n0,1,1,1\n");
}

TEST(Config, ShippedFilesMatchPresets) {
    EXPECT_EQ(load_config_document(kSource + "/configs/memory_test.json"), memory_test_preset());
    EXPECT_EQ(load_config_document(kSource + "/configs/partial_swap.json"), partial_swap_preset());
    EXPECT_THROW(preset_document("nope"), ValidationError);
}

TEST(Config, PresetsEncodeTheMeasurementTable) {
    const auto mem = preset("memory_test");
    EXPECT_EQ(mem.setup.instrument.settings, (std::vector<std::string>{"X", "Z", "-X", "-Z"}));
    EXPECT_LT(max_abs_diff(mem.setup.unitary, memory_test_unitary()), 1e-15);
    EXPECT_NEAR(qubit::bloch_vector(mem.setup.instrument.repreparations[0])[0], -1.0, 1e-15);
    EXPECT_NEAR(qubit::bloch_vector(mem.setup.instrument.repreparations[1])[0], 1.0, 1e-15);
    const auto ps = preset("partial_swap");
    EXPECT_NEAR(qubit::bloch_vector(ps.setup.instrument.repreparations[0])[1], 1.0, 1e-15);
    EXPECT_NEAR(qubit::bloch_vector(ps.setup.instrument.repreparations[1])[1], -1.0, 1e-15);
    EXPECT_EQ(*mem.shots, 10000u);
}

TEST(Config, RejectsMalformedDocuments) {
    auto doc = memory_test_preset();
    doc.erase("settings");
    EXPECT_THROW(parse_config(doc), ValidationError);
    doc = memory_test_preset();
    doc["shots"] = -5;
    EXPECT_THROW(parse_config(doc), ValidationError);
    doc = memory_test_preset();
    doc["repreparations"] = json::array({"-", "sideways"});
    EXPECT_THROW(parse_config(doc), ValidationError);
    doc = memory_test_preset();
    doc["wait_ms"] = -1.0;
    EXPECT_THROW(parse_config(doc), DomainError);
    doc = memory_test_preset();
    doc["unitary"] = json::array({json::array({1, 1}), json::array({0, 1})});
    EXPECT_THROW(parse_config(doc), ValidationError);
}

TEST(RunExperiment, ExactMemoryTest) {
    auto cfg = preset("memory_test");
    cfg.shots.reset();
    const auto res = run_experiment(cfg);
    EXPECT_NEAR(res.report.gamma, kBound, 1e-12);
    EXPECT_NEAR(res.report.pearl_delta, (2.0 + std::sqrt(2.0)) / 4.0, 1e-12);
    EXPECT_NEAR(*res.report.acde, 0.0, 1e-15);
    EXPECT_FALSE(res.counts.has_value());
    EXPECT_EQ(res.do_table.num_columns(), 4u);
}

TEST(RunExperiment, PartialSwapSweepMatchesClosedForm) {
    auto cfg = preset("partial_swap");
    cfg.shots.reset();
    for (int i = 0; i < 64; ++i) {
        const double alpha = std::numbers::pi * i / 63.0;
        cfg.setup.unitary = partial_swap(alpha);
        EXPECT_NEAR(run_experiment(cfg).report.gamma, (3.0 - std::sin(alpha) + std::cos(alpha)) / 2.0, 1e-9);
    }
}

TEST(RunExperiment, NoiseAnchorsAtTimeZeroAndDecays) {
    auto cfg = preset("memory_test");
    cfg.shots.reset();
    cfg.noise = NoiseParams{};
    EXPECT_NEAR(run_experiment(cfg).report.gamma, 0.642, 1e-9);
    cfg.wait_ms = 40.0;
    EXPECT_NEAR(run_experiment(cfg).report.gamma, decay_prediction(NoiseParams{}, {40.0}).front().second, 1e-12);
}

TEST(RunExperiment, SampledRunsAreSeedDeterministic) {
    auto cfg = preset("memory_test");
    cfg.shots = 2000;
    cfg.resamples = 200;
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    EXPECT_EQ(a.counts->counts, b.counts->counts);
    EXPECT_EQ(a.do_counts->counts, b.do_counts->counts);
    EXPECT_EQ(report_to_json(a.report), report_to_json(b.report));
    cfg.seed = 43;
    EXPECT_NE(run_experiment(cfg).counts->counts, a.counts->counts);
}

TEST(RunExperiment, SampledGammaConvergesAtLargeShots) {
    auto cfg = preset("memory_test");
    cfg.shots = 1000000;
    cfg.resamples = 100;
    int within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        cfg.seed = seed;
        const auto r = run_experiment(cfg).report;
        if (std::abs(r.gamma - kBound) <= 3.0 * *r.std_errors->gamma) ++within;
    }
    EXPECT_GE(within, 99);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRuns) {
    const fs::path one = scratch_dir("det1"), two = scratch_dir("det2");
    const std::string args = "simulate --preset memory_test --resamples 300 --seed 7 --out ";
    ASSERT_EQ(run_cli(args + "\"" + one.string() + "\"", one / "log"), 0);
    ASSERT_EQ(run_cli(args + "\"" + two.string() + "\"", two / "log"), 0);
    for (const char *f : {"report.json", "counts.csv", "do_counts.csv"}) {
        EXPECT_FALSE(slurp(one / f).empty()) << f;
        EXPECT_EQ(slurp(one / f), slurp(two / f)) << f;
    }
    const auto report = ordered_json::parse(slurp(one / "report.json"));
    EXPECT_EQ(report.at("seed").get<int>(), 7);
    EXPECT_EQ(report.at("resamples").get<int>(), 300);
}

TEST(Cli, CertifyReadsTheFixtures) {
    const fs::path dir = scratch_dir("certify");
    ASSERT_EQ(run_cli("certify --counts \"" + kSource + "/data/fixtures/observational.csv\" --do \"" + kSource +
                          "/data/fixtures/interventional.csv\" --resamples 200 --out \"" + dir.string() + "\"",
                      dir / "log"),
              0);
    const auto report = ordered_json::parse(slurp(dir / "report.json"));
    EXPECT_NEAR(report.at("gamma").get<double>(), 0.642, 1e-12);
    EXPECT_NEAR(report.at("acde").get<double>(), 0.0325, 1e-12);
    EXPECT_TRUE(report.at("verdict_nonclassical").get<bool>());
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch_dir("exit");
    std::ofstream(dir / "neg.csv") << "x,a,b,count\nX,0,0,-1\n";
    EXPECT_EQ(run_cli("certify --counts \"" + (dir / "neg.csv").string() + "\" --out \"" + dir.string() + "\"",
                      dir / "log1"),
              2);
    EXPECT_NE(slurp(dir / "log1").find("line 2"), std::string::npos);
    EXPECT_EQ(run_cli("frobnicate", dir / "log2"), 2);
    EXPECT_EQ(run_cli("simulate --preset nope --out \"" + dir.string() + "\"", dir / "log3"), 2);
    EXPECT_EQ(run_cli("classical-bound --x 9 --out \"" + dir.string() + "\"", dir / "log4"), 2);
    EXPECT_EQ(run_cli("simulate --preset memory_test --exact --wait-ms -1 --out \"" + dir.string() + "\"", dir / "log5"),
              3);
    EXPECT_EQ(run_cli("simulate --preset memory_test --exact --out \"" + dir.string() + "\"", dir / "log6"), 0);
}

TEST(Cli, DecayCurveIsMonotone) {
    const fs::path dir = scratch_dir("decay");
    ASSERT_EQ(run_cli("decay --t-max 200 --points 41 --out \"" + dir.string() + "\"", dir / "log"), 0);
    std::istringstream csv(slurp(dir / "decay.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "abscissa,value,stderr_lo,stderr_hi");
    double previous = -1.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        const double v = std::stod(line.substr(line.find(',') + 1));
        EXPECT_GE(v, previous);
        previous = v;
        ++rows;
    }
    EXPECT_EQ(rows, 41);
    const auto summary = ordered_json::parse(slurp(dir / "decay_summary.json"));
    EXPECT_NEAR(summary.at("crossing_time_ms").get<double>(), 64.39302961222296, 1e-9);
}
