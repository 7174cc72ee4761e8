#pragma once

#include <chrono>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "platonic/errors.hpp"

namespace platonic {

struct CheckRecord {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst deviation, ratio, etc.
    double tolerance = 0.0;  // 0 when the check is exact
    double elapsed_seconds = 0.0;
    std::string detail;
};

/// Aggregated check results; JSON for machines, a table for humans.
struct Report {
    std::vector<CheckRecord> checks;

    bool all_pass() const {
        for (const CheckRecord& c : checks)
            if (!c.pass) return false;
        return true;
    }

    nlohmann::json to_json(bool include_timings = true) const {
        nlohmann::json arr = nlohmann::json::array();
        for (const CheckRecord& c : checks) {
            nlohmann::json j{{"name", c.name},
                             {"status", c.pass ? "pass" : "fail"},
                             {"measured", c.measured},
                             {"tolerance", c.tolerance}};
            if (include_timings) j["elapsed_seconds"] = c.elapsed_seconds;
            if (!c.detail.empty()) j["detail"] = c.detail;
            arr.push_back(std::move(j));
        }
        return nlohmann::json{{"all_pass", all_pass()}, {"checks", std::move(arr)}};
    }

    std::string summary() const {
        std::ostringstream os;
        std::size_t passed = 0;
        for (const CheckRecord& c : checks) {
            os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  measured=" << c.measured
               << " tolerance=" << c.tolerance;
            if (!c.detail.empty()) os << "  (" << c.detail << ")";
            os << "\n";
            if (c.pass) ++passed;
        }
        os << passed << "/" << checks.size() << " checks passed\n";
        return os.str();
    }

    void write_json(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ResourceError("cannot open report file " + path);
        out << to_json().dump(2) << "\n";
    }
};

/// Records one check, timing the body and converting exceptions to failures.
template <class F>
void run_check(Report& report, const std::string& name, double tolerance, F body) {
    CheckRecord rec;
    rec.name = name;
    rec.tolerance = tolerance;
    auto t0 = std::chrono::steady_clock::now();
    try {
        rec.measured = body();
        rec.pass = tolerance > 0.0 ? rec.measured <= tolerance : rec.measured == 0.0;
    } catch (const std::exception& e) {
        rec.pass = false;
        rec.detail = e.what();
        rec.measured = std::numeric_limits<double>::infinity();
    }
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.checks.push_back(std::move(rec));
}

}  // namespace platonic
