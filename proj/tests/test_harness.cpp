#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "platonic/bench.hpp"
#include "platonic/checks.hpp"
#include "platonic/report.hpp"
#include "platonic/train.hpp"

using namespace platonic;

TEST_CASE("report records pass, fail, and exception outcomes") {
    Report r;
    run_check(r, "ok", 1e-6, []() { return 1e-9; });
    run_check(r, "too_big", 1e-6, []() { return 1e-3; });
    run_check(r, "exact_ok", 0.0, []() { return 0.0; });
    run_check(r, "exact_bad", 0.0, []() { return 1.0; });
    run_check(r, "throws", 1e-6, []() -> double { throw NumericError("boom"); });
    CHECK(r.checks.size() == 5);
    CHECK(r.checks[0].pass);
    CHECK_FALSE(r.checks[1].pass);
    CHECK(r.checks[2].pass);
    CHECK_FALSE(r.checks[3].pass);
    CHECK_FALSE(r.checks[4].pass);
    CHECK(r.checks[4].detail.find("boom") != std::string::npos);
    CHECK_FALSE(r.all_pass());
    nlohmann::json j = r.to_json();
    CHECK(j["all_pass"] == false);
    CHECK(j["checks"].size() == 5);
    CHECK(j["checks"][0]["status"] == "pass");
    CHECK(j["checks"][1]["status"] == "fail");
}

TEST_CASE("exact polynomial-degree classification of counts") {
    std::vector<long long> xs = {5, 11, 24, 64, 97};
    auto poly = [&](long long a, long long b, long long c) {
        std::vector<long long> ys;
        for (long long x : xs) ys.push_back(a * x * x + b * x + c);
        return ys;
    };
    CHECK(detail::exact_affine_counts(xs, poly(0, 3, 17)));
    CHECK_FALSE(detail::exact_affine_counts(xs, poly(1, 3, 17)));
    CHECK(detail::exact_quadratic_counts(xs, poly(2, -5, 9)));
    std::vector<long long> cubic;
    for (long long x : xs) cubic.push_back(x * x * x);
    CHECK_FALSE(detail::exact_quadratic_counts(xs, cubic));
    CHECK(detail::exact_count_degree(xs, poly(0, 0, 7)) == 0);
    CHECK(detail::exact_count_degree(xs, poly(0, 2, 1)) == 1);
    CHECK(detail::exact_count_degree(xs, poly(3, 2, 1)) == 2);
    CHECK(detail::exact_count_degree(xs, cubic) == -1);
}

TEST_CASE("benchmark measures exact degree-1 and degree-2 count laws") {
    BenchConfig bc;
    bc.ns = {16, 32, 64, 128};
    bc.reps = 1;
    bc.warmups = 0;
    std::vector<BenchRow> rows = run_bench(bc);
    CHECK(rows.size() == 8);
    BenchSlopes soft = fit_slopes("softmax_attention", rows);
    BenchSlopes lin = fit_slopes("linear_convolution", rows);
    CHECK(soft.multiply_degree == 2);
    CHECK(lin.multiply_degree == 1);

    std::string path = "bench_test.csv";
    write_bench_csv(path, rows, {soft, lin});
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "mode,group,N,median_seconds,multiplies,status,wallclock_slope,multiply_degree");
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        ++count;
        std::stringstream ss(line);
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        CHECK(cols.size() == 8);
        CHECK(cols[5] == "ok");
        // 17-significant-digit floats must round-trip exactly
        double secs = std::stod(cols[3]);
        CHECK(format_g17(secs) == cols[3]);
    }
    CHECK(count == 8);
    std::remove(path.c_str());
}

TEST_CASE("benchmark skips softmax rows beyond the memory guard") {
    BenchConfig bc;
    bc.mode = "softmax_attention";
    bc.ns = {8, 16, 32};
    bc.max_softmax_n = 16;
    bc.reps = 1;
    bc.warmups = 0;
    std::vector<BenchRow> rows = run_bench(bc);
    CHECK(rows.size() == 3);
    CHECK_FALSE(rows[0].skipped);
    CHECK_FALSE(rows[1].skipped);
    CHECK(rows[2].skipped);
    CHECK_THROWS_AS(
        [&]() {
            BenchConfig bad;
            bad.mode = "fft";
            run_bench(bad);
        }(),
        UsageError);
}

TEST_CASE("config file parsing and precedence over flags") {
    std::istringstream ini(
        "# comment\n"
        "[train]\n"
        "steps = 7\n"
        "lr = 0.25\n"
        "\n"
        "[model]\n"
        "group = C4\n"
        "pooling = sum\n");
    auto kv = read_config_lines(ini, "inline");
    CHECK(kv.at("train.steps") == "7");
    CHECK(kv.at("model.group") == "C4");

    TrainConfig tc;
    tc.steps = 99;        // stands in for a command-line flag
    tc.batch = 5;         // flag not present in the file: must survive
    apply_train_config(kv, tc);
    CHECK(tc.steps == 7);  // config file wins over the flag
    CHECK(tc.lr == 0.25);
    CHECK(tc.batch == 5);
    CHECK(tc.model.group == "C4");
    CHECK(tc.model.pooling == Pooling::sum);

    CHECK_THROWS_AS(apply_train_config({{"train.unknown", "1"}}, tc), UsageError);
    CHECK_THROWS_AS(apply_train_config({{"train.steps", "banana"}}, tc), UsageError);
    CHECK_THROWS_AS(apply_train_config({{"model.learned_freqs", "perhaps"}}, tc), UsageError);
    std::istringstream bad("no equals sign here\n");
    CHECK_THROWS_AS(read_config_lines(bad, "inline"), UsageError);
    CHECK_THROWS_AS(read_config_file("missing.ini"), ResourceError);
}

TEST_CASE("synthetic task target is rotation and translation invariant") {
    SyntheticTask task;
    task.n_points = 6;
    std::vector<PointCloud> clouds = task.make_clouds(3, 211);
    FiniteGroup g = build_group("octahedron");
    for (const PointCloud& pc : clouds) {
        double base = task.target(pc);
        for (std::size_t e = 0; e < g.order(); ++e)
            CHECK(task.target(rotate_cloud(g, static_cast<int>(e), pc)) ==
                  doctest::Approx(base).epsilon(1e-12));
        CHECK(task.target(translate_cloud(pc, Tensor::full({3}, 2.5))) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("training loop with zero learning rate leaves the model untouched") {
    TrainConfig tc;
    tc.steps = 4;
    tc.warmup_steps = 1;
    tc.n_points = 5;
    tc.train_clouds = 8;
    tc.val_clouds = 4;
    tc.batch = 2;
    tc.eval_every = 2;
    tc.lr = 0.0;
    tc.model.channels = 4;
    tc.model.heads = 2;
    std::string dir = "train_lr0_out";
    TrainResult res = run_train(tc, dir, nullptr);
    CHECK(res.steps_run == 4);
    CHECK_FALSE(res.nan_abort);
    CHECK(res.final_val_mse == doctest::Approx(res.initial_val_mse).epsilon(1e-12));
    CHECK(res.rotated_val_deviation < 1e-9);
    CHECK(std::filesystem::exists(dir + "/loss.csv"));
    CHECK(std::filesystem::exists(dir + "/checkpoint.json"));
    std::ifstream csv(dir + "/loss.csv");
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 1 + tc.steps);
    std::filesystem::remove_all(dir);
}

TEST_CASE("a short real training run reduces the validation MSE") {
    TrainConfig tc;
    tc.steps = 40;
    tc.warmup_steps = 5;
    tc.n_points = 6;
    tc.train_clouds = 32;
    tc.val_clouds = 8;
    tc.batch = 8;
    tc.eval_every = 10;
    tc.model.channels = 4;
    tc.model.heads = 2;
    std::string dir = "train_short_out";
    Report report;
    TrainResult res = run_train(tc, dir, &report);
    CHECK_FALSE(res.nan_abort);
    CHECK(res.final_val_mse < res.initial_val_mse);
    CHECK(res.rotated_val_deviation < 1e-9);
    CHECK(std::filesystem::exists(dir + "/report.json"));
    std::filesystem::remove_all(dir);
}
