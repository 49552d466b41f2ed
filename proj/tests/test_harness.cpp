#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dfrc/config_io.hpp"
#include "dfrc/harness.hpp"
#include "dfrc/parallel.hpp"

using namespace dfrc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    fs::path d = fs::temp_directory_path() / ("dfrc_harness_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text)
{
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string render(const std::string& kind, const SystemConfig& cfg)
{
    std::ostringstream out;
    write_table(out, kind, cfg, run_kind(kind, cfg));
    return out.str();
}

// Small but complete scenario so that every table runs in well under a second.
SystemConfig small_config()
{
    SystemConfig cfg;
    cfg.cell_radius = 200;
    cfg.sigma_delta = 1.5;
    cfg.radar_link_gain_db = 150.12;
    cfg.n_candidates = 8;
    cfg.n_drops = 2;
    cfg.nu_max = 5;
    cfg.snr_db = {0, 10};
    cfg.selection_candidates = {4, 6};
    cfg.tradeoff_ranges = {300, 600};
    cfg.tradeoff_users = {2};
    cfg.tradeoff_rcs = {1.0};
    cfg.ber_min_errors = 10;
    cfg.ber_max_bits = 2000;
    cfg.ber_min_drops = 2;
    cfg.ber_blocks_per_drop = 2;
    cfg.af_tau_max = 2e-6;
    cfg.af_fd_max = 20e3;
    return cfg;
}

}  // namespace

TEST_CASE("number formatting")
{
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1e-12) == "1e-12");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(1.0 / 3) == "0.3333333333");
    CHECK(format_number(810000) == "810000");
}

TEST_CASE("sweep parsing and expansion")
{
    Sweep s = parse_sweep("mu=5e9:1e10:2.5e9");
    CHECK(s.key == "mu");
    CHECK(s.values() == std::vector<double>{5e9, 7.5e9, 1e10});
    CHECK(parse_sweep("n_users=2:6:2").values().size() == 3);
    CHECK(parse_sweep("x=0:0.3:0.1").values().size() == 4);  // inclusive despite rounding
    CHECK_THROWS_AS(parse_sweep("mu"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("=1:2:1"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("mu=1:2"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("mu=1:2:0"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("mu=3:2:1"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("mu=1:2:abc"), InvalidArgument);
    CHECK_THROWS_AS(parse_sweep("mu=1x:2:1"), InvalidArgument);
}

TEST_CASE("tables reject ragged rows")
{
    Table t;
    t.columns = {"a", "b"};
    t.add_row({"1", "2"});
    CHECK_THROWS_AS(t.add_row({"1"}), InvalidArgument);
}

TEST_CASE("manifest block precedes the CSV header")
{
    SystemConfig cfg = small_config();
    Table t;
    t.columns = {"x", "y"};
    t.add_row({"1", "2"});
    t.notes = {{"note", "value"}};
    std::ostringstream out;
    write_table(out, "spectrum", cfg, t, {parse_sweep("mu=1:2:1")});
    const std::string text = out.str();
    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> all;
    while (std::getline(lines, line)) all.push_back(line);
    REQUIRE(all.size() == 8);
    CHECK(all[0] == std::string("# dfrc ") + DFRC_VERSION);
    CHECK(all[1] == "# kind: spectrum");
    CHECK(all[2] == "# config_hash: " + config_hash(cfg));
    CHECK(all[3] == "# seed: 1");
    CHECK(all[4] == "# sweep: mu=1:2:1");
    CHECK(all[5] == "# note: value");
    CHECK(all[6] == "x,y");
    CHECK(all[7] == "1,2");
}

TEST_CASE("every experiment kind runs and is byte-identical on rerun")
{
    SystemConfig cfg = small_config();
    for (const char* kind : kExperimentKinds) {
        CAPTURE(kind);
        const std::string a = render(kind, cfg);
        const std::string b = render(kind, cfg);
        CHECK(a == b);
        CHECK(a.find(std::string("# kind: ") + kind) != std::string::npos);
    }
}

TEST_CASE("results do not depend on the worker count")
{
    SystemConfig cfg = small_config();
    ::setenv("DFRC_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    const std::string one = render("sumrate", cfg);
    ::setenv("DFRC_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    const std::string three = render("sumrate", cfg);
    ::unsetenv("DFRC_THREADS");
    CHECK(one == three);
}

TEST_CASE("parallel_for visits every index and forwards exceptions")
{
    std::vector<int> hit(100, 0);
    parallel_for(hit.size(), [&](size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](size_t i) {
                        if (i == 7) throw Infeasible("x");
                    }),
                    Infeasible);
}

TEST_CASE("different seeds give different drops")
{
    SystemConfig cfg = small_config();
    const std::string a = render("sumrate", cfg);
    cfg.seed = 2;
    CHECK(render("sumrate", cfg) != a);
}

TEST_CASE("sweeps prepend their values as columns")
{
    SystemConfig cfg = small_config();
    Table t = run_with_sweeps("spectrum", cfg, {parse_sweep("mu=5e9:1e10:5e9")});
    CHECK(t.columns.front() == "mu");
    CHECK(t.rows.front().front() == "5000000000");
    CHECK(t.rows.back().front() == "1e+10");
    CHECK_THROWS_AS(run_with_sweeps("spectrum", cfg, {parse_sweep("nope=1:2:1")}), InvalidArgument);
}

TEST_CASE("run_experiment exit codes")
{
    const fs::path dir = scratch_dir();
    std::ostringstream err;
    ExperimentSpec spec;
    spec.kind = "spectrum";
    spec.out_path = (dir / "out.csv").string();

    spec.config_path = write_file(dir, "ok.json", R"({"seed": 3})").string();
    CHECK(run_experiment(spec, err) == kExitOk);
    const std::string first = slurp(spec.out_path);
    CHECK(first.find("# seed: 3") != std::string::npos);
    spec.seed = 9;
    CHECK(run_experiment(spec, err) == kExitOk);
    CHECK(slurp(spec.out_path).find("# seed: 9") != std::string::npos);
    spec.seed.reset();

    spec.config_path = (dir / "missing.json").string();
    CHECK(run_experiment(spec, err) == kExitInvalidConfig);
    spec.config_path = write_file(dir, "bad.json", R"({"mask_order": 3})").string();
    CHECK(run_experiment(spec, err) == kExitInvalidConfig);
    spec.config_path = write_file(dir, "unknown.json", R"({"colour": 3})").string();
    CHECK(run_experiment(spec, err) == kExitInvalidConfig);
    spec.kind = "nonsense";
    spec.config_path = write_file(dir, "ok2.json", "{}").string();
    CHECK(run_experiment(spec, err) == kExitInvalidConfig);

    spec.kind = "sumrate";
    spec.config_path = write_file(dir, "infeasible.json",
                                  R"({"n_drops": 1, "snr_db": [0], "rho_user": 40, "cell_radius": 200})")
                           .string();
    CHECK(run_experiment(spec, err) == kExitInfeasible);

    spec.kind = "selection";
    spec.config_path = write_file(dir, "guard.json",
                                  R"({"n_drops": 1, "n_users": 8, "selection_candidates": [60]})")
                           .string();
    CHECK(run_experiment(spec, err) == kExitGuard);

    spec.kind = "spectrum";
    spec.config_path = write_file(dir, "ok3.json", "{}").string();
    spec.out_path = (dir / "no_such_dir" / "out.csv").string();
    CHECK(run_experiment(spec, err) == kExitFailure);
    fs::remove_all(dir);
}

TEST_CASE("noise for an SNR point")
{
    CHECK(noise_for_snr(10) == doctest::Approx(0.1));
    CHECK(noise_for_snr(0) == doctest::Approx(1.0));
}
