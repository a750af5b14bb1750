#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "supercrit/acceptance.hpp"
#include "supercrit/runner.hpp"

using namespace supercrit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("supercrit_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(const json& j) {
    try {
        parse_config_document(j);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
        return e.what();
    }
    return "";
}

const json kSmallQuasi = {{"name", "quasi"},
                          {"experiment", "quasiconvergence"},
                          {"params", {{"dim", 13}, {"exponent", 3.0}}},
                          {"grid", {{"core_radius", 1.0}, {"core_cells", 60}, {"r_max", 300.0}}},
                          {"bracket", {{"alpha", 1.0}, {"beta", 2.0}}},
                          {"initial", {{"preset", "blend"}, {"weight", 0.5}}},
                          {"evolution", {{"convergence_eps", 1e-6}, {"store_every", 50}}}};

} // namespace

TEST(Csv, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mant(-1, 1);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int k = 0; k < 1000; ++k) {
        const double v = std::ldexp(mant(rng), ex(rng));
        ASSERT_EQ(std::stod(format_double(v)), v);
    }
}

TEST(Csv, ProfileRoundTrip) {
    const auto dir = scratch("csv");
    const GridPtr g = make_grid({1.0, 10, 20.0});
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-(*g)[i]) / 3;
    {
        CsvWriter w(dir / "u.csv", {"r", "u"});
        for (std::size_t i = 0; i < v.size(); ++i) w.row({(*g)[i], v[i]});
    }
    const auto back = read_profile_csv(dir / "u.csv");
    ASSERT_EQ(back.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_EQ(back[i], v[i]);
        EXPECT_EQ(back.r(i), (*g)[i]);
    }
}

TEST(Config, InvalidExponentNamesField) {
    const std::string msg = config_error({{"experiment", "steady"}, {"params", {{"dim", 13}, {"exponent", 1.0}}}});
    EXPECT_NE(msg.find("params.exponent"), std::string::npos) << msg;
}

TEST(Config, FieldPathsInBatches) {
    const json batch = {{"experiments",
                         {{{"name", "a"}, {"experiment", "interp"}},
                          {{"name", "b"}, {"experiment", "steady"}, {"params", {{"dim", "x"}}}}}}};
    const std::string msg = config_error(batch);
    EXPECT_NE(msg.find("experiments[1].params.dim"), std::string::npos) << msg;
}

TEST(Config, ModulePreconditions) {
    // p below p_c(13) cannot be used for steady-state experiments
    const std::string msg = config_error({{"experiment", "steady"}, {"params", {{"dim", 13}, {"exponent", 2.0}}}});
    EXPECT_NE(msg.find("params.exponent"), std::string::npos) << msg;
    EXPECT_NE(config_error({{"experiment", "nope"}}).find("experiment"), std::string::npos);
    EXPECT_NE(config_error({{"experiment", "quasiconvergence"}, {"bracket", {{"alpha", 2.0}, {"beta", 1.0}}}})
                  .find("bracket.beta"),
              std::string::npos);
    EXPECT_NE(config_error({{"experiment", "quasiconvergence"}, {"evolution", {{"dt", -1.0}}}}).find("evolution.dt"),
              std::string::npos);
}

TEST(Run, ConstantsTable) {
    const auto dir = scratch("table");
    const auto cfgs = parse_config_document(
        {{"name", "tab"}, {"experiment", "constants-table"}, {"constants_table", {{"n_min", 11}, {"n_max", 20}}}});
    const auto m = run(cfgs.at(0), dir);
    EXPECT_TRUE(m.passed()) << m.to_json().dump(2);
    std::ifstream in(dir / "tab" / "constants.csv");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 11);
    EXPECT_TRUE(fs::exists(dir / "tab" / "manifest.json"));
}

TEST(Run, DeterministicAndManifestRoundTrip) {
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    const auto cfgs = parse_config_document(kSmallQuasi);
    const auto ma = run(cfgs.at(0), a);
    ASSERT_TRUE(ma.passed()) << ma.to_json().dump(2);
    run(cfgs.at(0), b);
    EXPECT_EQ(slurp(a / "quasi" / "diagnostics.csv"), slurp(b / "quasi" / "diagnostics.csv"));
    EXPECT_EQ(slurp(a / "quasi" / "profiles" / "state_00000.csv"), slurp(b / "quasi" / "profiles" / "state_00000.csv"));

    // re-run from the written manifest's embedded config
    const auto from_manifest = parse_config_document(load_json_file(a / "quasi" / "manifest.json"));
    run(from_manifest.at(0), c);
    EXPECT_EQ(slurp(a / "quasi" / "diagnostics.csv"), slurp(c / "quasi" / "diagnostics.csv"));
    for (const auto& e : fs::directory_iterator(a / "quasi" / "profiles"))
        EXPECT_EQ(slurp(e.path()), slurp(c / "quasi" / "profiles" / e.path().filename()));
}

TEST(Run, QuasiconvergenceGammaInBracket) {
    const auto dir = scratch("quasi_gamma");
    const auto m = run(parse_config_document(kSmallQuasi).at(0), dir);
    const auto summary = load_json_file(dir / "quasi" / "summary.json");
    EXPECT_GE(summary["gamma_est"].get<double>(), 1.0);
    EXPECT_LE(summary["gamma_est"].get<double>(), 2.0);
    bool found = false;
    for (const auto& c : m.checks)
        if (c.name.find("gamma_est") != std::string::npos) found = c.passed;
    EXPECT_TRUE(found);
}

TEST(Run, ModuleErrorsRecordedInManifest) {
    const auto dir = scratch("err");
    json j = kSmallQuasi;
    j["evolution"]["t_max"] = 1e-3;
    const auto m = run(parse_config_document(j).at(0), dir);
    EXPECT_FALSE(m.passed());
    EXPECT_NE(m.error.find("NotConverged"), std::string::npos) << m.error;
    EXPECT_TRUE(load_json_file(dir / "quasi" / "manifest.json").contains("error"));
}

TEST(Batch, ParallelExperimentsWriteOwnDirectories) {
    const auto dir = scratch("batch");
    const json batch = {{"experiments",
                         {{{"name", "interp3"}, {"experiment", "interp"}, {"params", {{"dim", 3}, {"exponent", 3.0}}},
                           {"interp", {{"random_count", 2}}}},
                          {{"name", "table"}, {"experiment", "constants-table"}},
                          {{"name", "blow"}, {"experiment", "blowdown"}, {"params", {{"dim", 13}, {"exponent", 3.0}}}}}}};
    const auto ms = run_batch(parse_config_document(batch), dir, 3);
    ASSERT_EQ(ms.size(), 3u);
    for (const auto& m : ms) EXPECT_TRUE(m.passed()) << m.to_json().dump(2);
    EXPECT_TRUE(fs::exists(dir / "interp3" / "interp.json"));
    EXPECT_TRUE(fs::exists(dir / "table" / "constants.csv"));
    EXPECT_TRUE(fs::exists(dir / "blow" / "blowdown.csv"));

    const json dup = {{"experiments", {{{"name", "x"}, {"experiment", "interp"}}, {{"name", "x"}, {"experiment", "interp"}}}}};
    EXPECT_THROW(run_batch(parse_config_document(dup), dir, 2), Error);
}

TEST(Batch, ThreadCountFromEnvironment) {
    ::setenv(kThreadsEnv, "3", 1);
    EXPECT_EQ(default_threads(), 3u);
    ::setenv(kThreadsEnv, "junk", 1);
    EXPECT_GE(default_threads(), 1u);
    ::unsetenv(kThreadsEnv);
}

TEST(Verify, FilterAndNegativeControl) {
    std::FILE* sink = std::tmpfile();
    const auto clean = acceptance::run_acceptance("constants", {}, sink);
    ASSERT_EQ(clean.size(), 1u);
    EXPECT_EQ(clean[0].id, 1);
    EXPECT_TRUE(clean[0].passed());

    acceptance::Options perturbed;
    perturbed.perturb_constant = 1e-3;
    const auto bad = acceptance::run_acceptance("constants", perturbed, sink);
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_FALSE(bad[0].passed());
    bool indicial_failed = false;
    for (const auto& m : bad[0].measurements)
        if (m.label == "indicial residual") indicial_failed = !m.ok;
    EXPECT_TRUE(indicial_failed);
    std::fclose(sink);
}
