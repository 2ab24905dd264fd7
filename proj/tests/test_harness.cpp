#include <doctest.h>

#include "fcov/harness.hpp"
#include "fcov/io.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace fcov;
using namespace fcov::testing;

TEST_SUITE_BEGIN("harness");

namespace {

namespace fs = std::filesystem;

fs::path temp_dir()
{
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("fcov_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& cwd)
{
    const std::string cmd = "cd '" + cwd.string() + "' && '" + FCOV_CLI_PATH + "' " + args + " >cli_stdout.txt 2>cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("a 3x4 CSV loads as three curves on a four-point grid")
{
    const fs::path dir = temp_dir();
    write_text(dir / "c.csv", "1,2,3,4\n5,6,7,8\n9,10,11,12\n");
    const FunctionalSample s = ingest_curves(dir / "c.csv", CurveCsvFormat::plain);
    CHECK(s.size() == 3);
    CHECK(s.dim() == 4);
    CHECK(s.grid.weights()[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.curves[1].values[2] == 7.0);
}

TEST_CASE("a grid header row produces trapezoid weights")
{
    const fs::path dir = temp_dir();
    write_text(dir / "c.csv", "0,0.5,1.5\n1,2,3\n4,5,6\n");
    const FunctionalSample s = ingest_curves(dir / "c.csv", CurveCsvFormat::header_grid);
    CHECK(s.size() == 2);
    // hand-computed trapezoid weights for points {0, 0.5, 1.5}
    CHECK(s.grid.weights()[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.grid.weights()[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(s.grid.weights()[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("distinct CSV failures: ragged, non-numeric, empty, unreadable")
{
    const fs::path dir = temp_dir();

    write_text(dir / "ragged.csv", "1,2,3\n4,5\n");
    try {
        ingest_curves(dir / "ragged.csv", CurveCsvFormat::plain);
        FAIL("expected csv_error");
    } catch (const csv_error& e) {
        CHECK(e.fault == CsvFault::ragged_row);
        CHECK(e.row == 2);
    }

    write_text(dir / "nan.csv", "1,2\n3,four\n");
    try {
        ingest_curves(dir / "nan.csv", CurveCsvFormat::plain);
        FAIL("expected csv_error");
    } catch (const csv_error& e) {
        CHECK(e.fault == CsvFault::non_numeric);
        CHECK(e.row == 2);
        CHECK(e.column == 2);
    }

    write_text(dir / "empty.csv", "");
    try {
        ingest_curves(dir / "empty.csv", CurveCsvFormat::plain);
        FAIL("expected csv_error");
    } catch (const csv_error& e) {
        CHECK(e.fault == CsvFault::empty_file);
    }

    try {
        ingest_curves(dir / "missing.csv", CurveCsvFormat::plain);
        FAIL("expected csv_error");
    } catch (const csv_error& e) {
        CHECK(e.fault == CsvFault::unreadable);
    }
}

TEST_CASE("curves and operators round-trip through CSV")
{
    const fs::path dir = temp_dir();
    const Grid grid = Grid::uniform(5);
    const FunctionalSample s = random_sample(grid, 4, 7);
    write_curves_csv(dir / "s.csv", s, CurveCsvFormat::plain);
    const FunctionalSample back = ingest_curves(dir / "s.csv", CurveCsvFormat::plain);
    REQUIRE(back.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK((back.curves[static_cast<std::size_t>(i)].values - s.curves[static_cast<std::size_t>(i)].values)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);

    const CovOperator op = random_psd(grid, 9);
    write_operator_csv(dir / "op.csv", op);
    const CovOperator op_back = ingest_operator(dir / "op.csv");
    CHECK((op_back.kernel() - op.kernel()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grouped curves split on the leading id column")
{
    const fs::path dir = temp_dir();
    write_text(dir / "g.csv", "0,1,2\n0,3,4\n5,5,6\n5,7,8\n5,9,10\n");
    const auto groups = ingest_grouped_curves(dir / "g.csv", CurveCsvFormat::plain);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].size() == 2);
    CHECK(groups[1].size() == 3);
    CHECK(*groups[0].label == "0");
    CHECK(*groups[1].label == "5");
    CHECK(groups[0].dim() == 2);
}

TEST_CASE("records round-trip through JSONL")
{
    const fs::path dir = temp_dir();
    std::vector<ResultRecord> records;
    for (int i = 0; i < 3; ++i) {
        ResultRecord r;
        r.experiment_id = "calibrate";
        r.params = {{"alpha", "0.05"}, {"n", std::to_string(50 * (i + 1))}};
        r.metric = "empirical_size";
        r.value = 0.01 * i;
        r.se = 0.001 * i;
        r.elapsed_ms = 12.5 * i;
        r.seed = 42;
        records.push_back(std::move(r));
    }
    write_records(dir / "r.jsonl", records, /*zero_elapsed=*/false);
    const auto back = read_records(dir / "r.jsonl");
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(back[i] == records[i]);
}

TEST_CASE("identical configs produce byte-identical result files")
{
    ExperimentConfig config;
    config.id = "calibrate";
    config.seed = 99;
    config.dim = 8;
    config.k = 3;
    config.sample_sizes = {20};
    config.alphas = {0.05};
    config.replications = 50;
    config.p_norm = 2.0;

    const fs::path dir1 = temp_dir();
    const fs::path dir2 = temp_dir();
    config.out_dir = dir1;
    run_experiment(config);
    config.out_dir = dir2;
    run_experiment(config);
    CHECK(read_text(dir1 / "records.jsonl") == read_text(dir2 / "records.jsonl"));
    CHECK(read_text(dir1 / "calibrate.csv") == read_text(dir2 / "calibrate.csv"));
    CHECK(!read_text(dir1 / "records.jsonl").empty());
}

TEST_CASE("the power experiment is a pass-through of power_curve")
{
    ExperimentConfig config;
    config.id = "power";
    config.seed = 7;
    config.dim = 8;
    config.decay = 4.0;
    config.sample_sizes = {20};
    config.alphas = {0.05};
    config.gammas = {0.0, 0.5};
    config.replications = 60;
    config.p_norm = 2.0;
    const auto records = run_experiment(config);

    const Grid grid = Grid::uniform(8);
    const DecaySpec spec{8, 4.0, 1.0};
    const CovOperator s1 = random_covariance(spec, grid, split_seed(7, 0xA1));
    const CovOperator s2 = random_covariance(spec, grid, split_seed(7, 0xA2));
    const auto points = power_curve(s1, s2, {0.0, 0.5}, 20, 0.05, 2.0, 60,
                                    TestMethod::concentration, split_seed(7, 0xA3));
    REQUIRE(records.size() == points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(records[i].value == points[i].power);
        CHECK(records[i].params.at("gamma") == format_double(points[i].gamma));
    }
}

TEST_CASE("size calibration stays within two standard errors of alpha")
{
    ExperimentConfig config;
    config.id = "calibrate";
    config.seed = 3;
    config.dim = 16;
    config.k = 4;
    config.sample_sizes = {50};
    config.alphas = {0.05};
    config.replications = 200;
    config.p_norm = 2.0;
    const auto records = run_experiment(config);
    REQUIRE(records.size() == 1);
    CHECK(records[0].value <= 0.05 + 2.0 * records[0].se);
}

TEST_CASE("experiment config validation")
{
    ExperimentConfig config;
    config.id = "nope";
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
    config.id = "power";
    config.gammas = {};
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
    config.id = "calibrate";
    config.replications = 0;
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}

TEST_CASE("classifier model files round-trip")
{
    const fs::path dir = temp_dir();
    const Grid grid = Grid::uniform(6);
    std::vector<FunctionalSample> data;
    FunctionalSample a = random_sample(grid, 8, 11);
    a.label = "low";
    FunctionalSample b = random_sample(grid, 9, 13);
    b.label = "high";
    data = {a, b};
    const TrainedClassifier c = train(data, 1.0, 17);
    save_classifier(dir / "model.json", c);
    const TrainedClassifier back = load_classifier(dir / "model.json");

    CHECK(back.labels.size() == 2);
    CHECK(back.labels[0].label == "low");
    const Curve q = random_curve(grid, 19);
    CHECK((posterior(c, q) - posterior(back, q)).cwiseAbs().maxCoeff() == 0.0);

    write_text(dir / "junk.json", "{\"format\": \"other\"}");
    CHECK_THROWS_AS(load_classifier(dir / "junk.json"), io_error);
}

TEST_CASE("CLI: simulate then ktest round trip with exit codes")
{
    const fs::path dir = temp_dir();
    CHECK(run_cli("simulate --dim 8 --n 25 --seed 3 --out a", dir) == 0);
    CHECK(run_cli("simulate --dim 8 --n 25 --seed 4 --out b", dir) == 0);
    CHECK(fs::exists(dir / "a_curves.csv"));
    CHECK(fs::exists(dir / "a_operator.csv"));

    REQUIRE(run_cli("ktest a_curves.csv b_curves.csv --alpha 0.05 --p-norm 2 --seed 5", dir) == 0);
    const auto j = nlohmann::json::parse(read_text(dir / "cli_stdout.txt"));
    for (const char* key : {"statistic", "threshold", "reject", "alpha", "p_norm", "per_sample_norms", "elapsed_ms"})
        CHECK(j.contains(key));

    // identical invocation reproduces everything except the timing field
    REQUIRE(run_cli("ktest a_curves.csv b_curves.csv --alpha 0.05 --p-norm 2 --seed 5", dir) == 0);
    auto j2 = nlohmann::json::parse(read_text(dir / "cli_stdout.txt"));
    auto j1 = j;
    j1.erase("elapsed_ms");
    j2.erase("elapsed_ms");
    CHECK(j1 == j2);

    CHECK(run_cli("ktest a_curves.csv missing.csv", dir) == 2); // unreadable input
    CHECK(run_cli("ktest a_curves.csv b_curves.csv --alpha 0.9", dir) == 1);
    CHECK(run_cli("nonsense", dir) == 1);
}

TEST_CASE("CLI: permutation and power subcommands emit parseable output")
{
    const fs::path dir = temp_dir();
    REQUIRE(run_cli("simulate --dim 6 --n 20 --seed 3 --out a", dir) == 0);
    REQUIRE(run_cli("simulate --dim 6 --n 20 --seed 9 --out b", dir) == 0);
    REQUIRE(run_cli("permtest a_curves.csv b_curves.csv --perms 50 --seed 2", dir) == 0);
    const auto j = nlohmann::json::parse(read_text(dir / "cli_stdout.txt"));
    CHECK(j.at("p_value").get<double>() <= 1.0);
    CHECK(j.at("p_value").get<double>() > 0.0);

    REQUIRE(run_cli("power --gammas 0 0.5 --n 20 --reps 40 --dim 8 --seed 6 --out pw", dir) == 0);
    CHECK(fs::exists(dir / "pw" / "records.jsonl"));
    CHECK(fs::exists(dir / "pw" / "power.csv"));
    const std::string csv = read_text(dir / "cli_stdout.txt");
    CHECK(csv.rfind("gamma,power,mean_elapsed_ms", 0) == 0);
}

TEST_CASE("CLI: classify train/predict and cluster run end to end")
{
    const fs::path dir = temp_dir();
    REQUIRE(run_cli("simulate --dim 6 --n 30 --seed 3 --out lo", dir) == 0);
    REQUIRE(run_cli("simulate --dim 6 --n 30 --seed 11 --decay 2 --scale 4 --out hi", dir) == 0);

    REQUIRE(run_cli("classify train lo=lo_curves.csv hi=hi_curves.csv --mode curve --p-norm 1 --seed 5 --out model.json", dir) == 0);
    CHECK(fs::exists(dir / "model.json"));
    REQUIRE(run_cli("classify predict --model model.json lo_curves.csv --out pred.csv", dir) == 0);
    const std::string pred = read_text(dir / "pred.csv");
    CHECK(pred.rfind("id,label,p_lo,p_hi", 0) == 0);

    // grouped input for clustering: ids 0..9 with 3 curves each
    {
        const Grid grid = Grid::uniform(6);
        std::ostringstream g;
        for (int gid = 0; gid < 10; ++gid) {
            const double scale = gid < 5 ? 1.0 : 5.0;
            const FunctionalSample s = random_sample(grid, 3, 500 + static_cast<std::uint64_t>(gid));
            for (const Curve& f : s.curves) {
                g << gid;
                for (int v = 0; v < 6; ++v)
                    g << "," << scale * f.values[v];
                g << "\n";
            }
        }
        write_text(dir / "groups.csv", g.str());
        write_text(dir / "labels.txt", "a\na\na\na\na\nb\nb\nb\nb\nb\n");
    }
    REQUIRE(run_cli("cluster groups.csv --k 2 --seed 7 --labels labels.txt --confusion conf.csv", dir) == 0);
    const auto j = nlohmann::json::parse(read_text(dir / "cli_stdout.txt"));
    CHECK(j.at("assignments").size() == 10);
    CHECK(fs::exists(dir / "conf.csv"));
}

TEST_SUITE_END();
