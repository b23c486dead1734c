// End-to-end checks of the command line: exit-code taxonomy, output files,
// and the fixture behaviours. Driven by ctest with --cli and --configs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli, g_configs;
fs::path g_work;

void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > " + (g_work / "stdout.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string last_stdout() {
    std::ifstream in(g_work / "stdout.txt");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

void test_flow_fixture() {
    const fs::path out = g_work / "flow";
    const int rc = run_cli("--quiet --config " + g_configs + "/biharmonic_sphere.cfg --out " +
                           out.string() + " flow");
    check(rc == 0, "biharmonic sphere fixture exits 0 (got " + std::to_string(rc) + ")");
    const std::string log = last_stdout();
    check(log.find("status=reached_t_end") != std::string::npos,
          "status line reports reached_t_end");
    const auto rows = read_csv(out / "sphere.csv");
    check(rows.size() >= 11, "diagnostics CSV has >= 10 data rows (got " +
                                 std::to_string(rows.empty() ? 0 : rows.size() - 1) + ")");
    // final mean radius within 1% of the closed form (1 - 16 t)^{1/4}
    double t_final = 0.0;
    if (rows.size() > 1) t_final = std::stod(rows.back()[0]);
    const double oracle = std::pow(1.0 - 16.0 * t_final, 0.25);
    // read the final snapshot mesh and average the vertex radii
    fs::path last_snap;
    long best_step = -1;
    for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        const auto pos = name.find("_step");
        if (pos == std::string::npos || entry.path().extension() != ".off") continue;
        const long step = std::stol(name.substr(pos + 5));
        if (step > best_step) {
            best_step = step;
            last_snap = entry.path();
        }
    }
    check(best_step >= 0, "snapshot meshes were written (stem_step{k}.off)");
    if (best_step >= 0) {
        std::ifstream in(last_snap);
        std::string off;
        int nv, nf, ne;
        in >> off >> nv >> nf >> ne;
        double mean_r = 0.0;
        for (int i = 0; i < nv; ++i) {
            double x, y, z;
            in >> x >> y >> z;
            mean_r += std::sqrt(x * x + y * y + z * z);
        }
        mean_r /= nv;
        check(std::abs(mean_r - oracle) / oracle < 0.01,
              "final mean radius matches the shrinkage law within 1%");
    }
}

void test_flow_rejects_bad_config() {
    const int rc = run_cli("--config " + g_configs + "/biharmonic_sphere.cfg --set flow.c_dt=5 --out " +
                           (g_work / "bad").string() + " flow");
    check(rc == 1, "c_dt out of range exits 1 (got " + std::to_string(rc) + ")");
    check(last_stdout().find("dt_safety") != std::string::npos, "message names the offending key");
}

void test_willmore_torus_fixture() {
    const fs::path out = g_work / "torus";
    const int rc = run_cli("--quiet --config " + g_configs + "/willmore_torus.cfg --out " +
                           out.string() + " flow");
    check(rc == 0, "willmore torus fixture exits 0 (got " + std::to_string(rc) + ")");
    const auto rows = read_csv(out / "torus.csv");
    check(rows.size() >= 3, "torus CSV has data rows");
    bool monotone = true;
    for (std::size_t k = 2; k < rows.size(); ++k)
        monotone = monotone && std::stod(rows[k][2]) <= std::stod(rows[k - 1][2]) * (1.0 + 1e-10);
    check(monotone, "willmore_energy column is non-increasing");
}

void test_concentration_exit_code() {
    const int rc = run_cli("--quiet --config " + g_configs +
                           "/biharmonic_sphere.cfg --set flow.concentration_eps=1.0 --set "
                           "flow.concentration_radius=5.0 --out " +
                           (g_work / "conc").string() + " flow");
    check(rc == 3, "tripped concentration monitor exits 3 (got " + std::to_string(rc) + ")");
}

void test_validate() {
    const int rc = run_cli("--quiet --config " + g_configs + "/validate.cfg --out " +
                           (g_work / "val").string() + " validate");
    check(rc == 0, "default validation suite exits 0 (got " + std::to_string(rc) + ")");
    const int rc_strict = run_cli("--quiet --config " + g_configs +
                                  "/validate.cfg --set validate.order_threshold=10 --out " +
                                  (g_work / "val2").string() + " validate");
    check(rc_strict == 4, "unreachable order threshold exits 4 (got " + std::to_string(rc_strict) + ")");
    check(last_stdout().find("below threshold") != std::string::npos,
          "per-row diagnosis names the failing rows");
}

void test_inequalities() {
    const fs::path out = g_work / "ineq";
    const int rc = run_cli("--quiet --config " + g_configs + "/inequalities.cfg --out " +
                           out.string() + " inequalities");
    check(rc == 0, "inequality sweep exits 0 (got " + std::to_string(rc) + ")");
    const auto rows = read_csv(out / "inequalities.csv");
    check(!rows.empty() &&
              rows[0] == std::vector<std::string>{"inequality_id", "n", "family_param", "lhs",
                                                  "rhs", "ratio", "h_smallness", "hypothesis_ok"},
          "report CSV carries the fixed schema");
    bool has_violation = false;
    for (const auto& row : rows)
        if (row.size() == 8 && row[7] == "false") has_violation = true;
    check(has_violation, "hypothesis-violating full-sphere row is flagged false");
    const int rc_bad = run_cli("--quiet --config " + g_configs +
                               "/inequalities.cfg --set inequalities.checks=gn7 --out " +
                               (g_work / "ineq2").string() + " inequalities");
    check(rc_bad == 1, "malformed family spec exits 1 (got " + std::to_string(rc_bad) + ")");
}

void test_make_mesh() {
    const fs::path out = g_work / "mesh";
    const int rc = run_cli("--quiet --config " + g_configs + "/biharmonic_sphere.cfg --set "
                           "output.stem=ico --out " +
                           out.string() + " make-mesh");
    // the flow-oriented fixture has [flow] keys that make-mesh does not know
    check(rc == 1, "make-mesh rejects a config with unknown (flow) keys (got " +
                       std::to_string(rc) + ")");
    const int rc2 = run_cli("--quiet --set mesh.source=torus --set mesh.major_radius=1.41421356 "
                            "--set mesh.minor_radius=1.0 --out " +
                            (g_work / "mesh2").string() + " make-mesh");
    check(rc2 == 0, "make-mesh from overrides alone exits 0 (got " + std::to_string(rc2) + ")");
    check(fs::exists(g_work / "mesh2" / "mesh.off"), "mesh file exists under --out");
    const int rc3 = run_cli("--quiet --set mesh.source=icosphere --set mesh.radius=-1 --out " +
                            (g_work / "mesh3").string() + " make-mesh");
    check(rc3 == 1, "negative radius exits 1 (got " + std::to_string(rc3) + ")");
}

void test_unknown_key_rejection() {
    const int rc = run_cli("--quiet --config " + g_configs +
                           "/biharmonic_sphere.cfg --set flow.typo_key=1 --out " +
                           (g_work / "typo").string() + " flow");
    check(rc == 1, "unknown config key exits 1 (got " + std::to_string(rc) + ")");
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") g_cli = argv[i + 1];
        if (flag == "--configs") g_configs = argv[i + 1];
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: cli_tests --cli <path> --configs <dir>\n");
        return 2;
    }
    g_work = fs::temp_directory_path() / "curvflow_cli_tests";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    test_flow_fixture();
    test_flow_rejects_bad_config();
    test_willmore_torus_fixture();
    test_concentration_exit_code();
    test_validate();
    test_inequalities();
    test_make_mesh();
    test_unknown_key_rejection();

    fs::remove_all(g_work);
    std::printf(g_failures ? "%d CLI checks FAILED\n" : "all CLI checks passed\n", g_failures);
    return g_failures ? 1 : 0;
}
