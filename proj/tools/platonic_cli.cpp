// platonic: group inspection, property checks, scaling benchmarks, and toy
// training for the equivariant point-cloud transformer library.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "platonic/bench.hpp"
#include "platonic/checkpoint.hpp"
#include "platonic/checks.hpp"
#include "platonic/group.hpp"
#include "platonic/report.hpp"
#include "platonic/train.hpp"

namespace {

using platonic::UsageError;

std::uint64_t env_default_seed() {
    const char* s = std::getenv("PLATONIC_SEED");
    if (!s) return 0;
    try {
        return std::stoull(s);
    } catch (...) {
        throw UsageError(std::string("PLATONIC_SEED is not an unsigned integer: ") + s);
    }
}

int cmd_groups(const std::string& name, const std::string& out_path) {
    platonic::FiniteGroup g;
    try {
        g = platonic::build_group(name);
    } catch (const platonic::ConstructionError&) {
        throw UsageError("unknown group '" + name +
                         "' (valid: trivial2, trivial3, flip2, flip3, signflips3, C<n>, D<n>, "
                         "tetrahedron, octahedron, icosahedron)");
    }
    nlohmann::json j;
    j["name"] = g.name;
    j["dim"] = g.dim;
    j["order"] = g.order();
    j["has_reflections"] = g.has_reflections;
    nlohmann::json els = nlohmann::json::array();
    for (const platonic::Tensor& m : g.elements) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < g.dim; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < g.dim; ++c) row.push_back(m.data[r * g.dim + c]);
            rows.push_back(std::move(row));
        }
        els.push_back(std::move(rows));
    }
    j["elements"] = std::move(els);
    j["cayley"] = g.cayley;
    j["inverse"] = g.inverse;
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw platonic::ResourceError("cannot open output file " + out_path);
        out << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        CLI::App app{"platonic group-equivariant transformer toolkit"};
        app.require_subcommand(1);
        std::uint64_t seed = env_default_seed();

        auto* groups = app.add_subcommand("groups", "dump a group's elements and tables");
        std::string group_name, groups_out;
        groups->add_option("--group", group_name, "group name")->required();
        groups->add_option("--out", groups_out, "write JSON here instead of stdout");

        auto* check = app.add_subcommand("check", "run the property suites");
        std::vector<std::string> check_groups;
        std::optional<double> tolerance;
        std::string report_path;
        bool inject_fault = false;
        check->add_option("--groups", check_groups, "comma-separated group list")->delimiter(',');
        check->add_option("--seed", seed, "RNG seed (default from PLATONIC_SEED)");
        check->add_option("--tolerance", tolerance,
                          "override every floating-point tolerance");
        check->add_option("--report", report_path, "write the JSON report here");
        check->add_flag("--inject-fault", inject_fault)->group("");  // hidden negative control

        auto* bench = app.add_subcommand("bench", "sequence-length scaling benchmark");
        platonic::BenchConfig bc;
        std::string bench_out = "bench.csv";
        bench->add_option("--mode", bc.mode, "softmax_attention | linear_convolution | both")
            ->required();
        bench->add_option("--ns", bc.ns, "ascending N sweep")->required()->delimiter(',');
        bench->add_option("--group", bc.group, "group name");
        bench->add_option("--out", bench_out, "CSV output path")->required();
        bench->add_option("--seed", bc.seed, "RNG seed (default from PLATONIC_SEED)");
        bench->add_option("--heads", bc.heads, "heads per frame");
        bench->add_option("--head-dim", bc.head_dim, "head dimension (even)");
        bench->add_option("--reps", bc.reps, "timed repeats per N");
        bench->add_option("--warmups", bc.warmups, "discarded warm-up runs per N");

        auto* train = app.add_subcommand("train", "train the toy invariant-regression model");
        platonic::TrainConfig tc;
        std::string train_config_path, train_out = "train_out";
        train->add_option("--config", train_config_path,
                          "key-value config file; its values override flags");
        train->add_option("--out", train_out, "output directory")->required();
        train->add_option("--steps", tc.steps, "optimization steps");
        train->add_option("--batch", tc.batch, "minibatch size");
        train->add_option("--lr", tc.lr, "peak learning rate");
        train->add_option("--momentum", tc.momentum, "momentum coefficient");
        train->add_option("--group", tc.model.group, "model group");
        train->add_option("--seed", tc.model.seed, "model seed (default from PLATONIC_SEED)");

        bc.seed = seed;
        tc.model.seed = seed;

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e);  // --help
            std::cerr << "error: code=usage message=\"" << e.what() << "\"\n";
            return 2;
        }

        if (groups->parsed()) return cmd_groups(group_name, groups_out);

        if (check->parsed()) {
            platonic::CheckConfig cfg;
            if (!check_groups.empty()) cfg.groups = check_groups;
            cfg.seed = seed;
            cfg.tolerance = tolerance;
            cfg.inject_fault = inject_fault;
            platonic::Report report = platonic::run_all_checks(cfg);
            std::cout << report.summary();
            if (!report_path.empty()) report.write_json(report_path);
            return report.all_pass() ? 0 : 1;
        }

        if (bench->parsed()) {
            for (std::size_t i = 1; i < bc.ns.size(); ++i)
                if (bc.ns[i] <= bc.ns[i - 1])
                    throw UsageError("--ns must be strictly ascending");
            std::vector<platonic::BenchRow> rows = platonic::run_bench(bc);
            std::vector<platonic::BenchSlopes> slopes;
            for (const std::string& m : {std::string("softmax_attention"),
                                         std::string("linear_convolution")})
                if (bc.mode == "both" || bc.mode == m)
                    slopes.push_back(platonic::fit_slopes(m, rows));
            platonic::write_bench_csv(bench_out, rows, slopes);
            for (const platonic::BenchSlopes& s : slopes)
                std::cout << s.mode << ": wallclock_slope=" << s.wallclock_slope
                          << " multiply_degree=" << s.multiply_degree << "\n";
            return 0;
        }

        if (train->parsed()) {
            if (!train_config_path.empty())
                platonic::apply_train_config(platonic::read_config_file(train_config_path), tc);
            platonic::Report report;
            platonic::TrainResult res = platonic::run_train(tc, train_out, &report);
            std::cout << report.summary();
            std::cout << "initial_val_mse=" << res.initial_val_mse
                      << " final_val_mse=" << res.final_val_mse
                      << " rotated_val_deviation=" << res.rotated_val_deviation << "\n";
            if (res.nan_abort) std::cerr << "warning: " << res.diagnostic << "\n";
            return report.all_pass() ? 0 : 1;
        }
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: code=usage message=\"" << e.what() << "\"\n";
        return 2;
    } catch (const platonic::ResourceError& e) {
        std::cerr << "error: code=resource message=\"" << e.what() << "\"\n";
        return 1;
    } catch (const platonic::NumericError& e) {
        std::cerr << "error: code=numeric message=\"" << e.what() << "\"\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: code=internal message=\"" << e.what() << "\"\n";
        return 1;
    }
}
