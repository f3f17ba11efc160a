#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"

#ifndef MIPTRACE_CLI_BIN
#error "MIPTRACE_CLI_BIN must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "miptrace_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<char> file_bytes(const fs::path& path) {
    const std::string s = slurp(path);
    return std::vector<char>(s.begin(), s.end());
}

RunResult run_cli(const std::string& args) {
    static int invocation = 0;
    const fs::path out_file = work_dir() / ("stdout_" + std::to_string(invocation) + ".log");
    const fs::path err_file = work_dir() / ("stderr_" + std::to_string(invocation) + ".log");
    ++invocation;

    const std::string cmd = std::string(MIPTRACE_CLI_BIN) + " " + args + " >" +
                            out_file.string() + " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    REQUIRE(out.good());
    out << text;
}

size_t regular_file_count(const fs::path& dir) {
    size_t n = 0;
    if (fs::exists(dir))
        for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

/// One noiseless two-sphere phantom shared by the pipeline tests; generated
/// once, on first use.
struct Fixture {
    fs::path dir = work_dir() / "fixture";
    fs::path spec = dir / "tor.phantom";
    fs::path pet = dir / "tor_pet.nii.gz";
    fs::path labels = dir / "tor_labels.nii.gz";

    Fixture() {
        if (fs::exists(pet)) return;
        fs::create_directories(dir);
        write_file(spec,
                   "# two-sphere test body\n"
                   "nx = 32\nny = 32\nnz = 16\n"
                   "background = 1.0\n"
                   "sphere = organ 14 10 8 6 8.0\n"
                   "sphere = tumor 20 24 8 4 5.0\n");
        RunResult r = run_cli("phantom " + spec.string() + " --out " + dir.string());
        REQUIRE(r.exit_code == 0);
        REQUIRE(fs::exists(pet));
        REQUIRE(fs::exists(labels));
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("version flag exits cleanly") {
    RunResult r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK_FALSE(r.out.empty());
}

TEST_CASE("phantom generation writes the volume pair") {
    Fixture& f = fixture();
    CHECK(fs::exists(f.pet));
    CHECK(fs::exists(f.labels));
}

TEST_CASE("project correct metrics pipeline") {
    Fixture& f = fixture();
    const fs::path proj = work_dir() / "proj";
    RunResult r = run_cli("project " + f.pet.string() + " --labels " + f.labels.string() +
                          " --n 4 --interp nearest --out " + proj.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("delta_theta=45") != std::string::npos);
    const fs::path intensity = proj / "tor_pet_intensity.mips";
    const fs::path provenance = proj / "tor_pet_provenance.mips";
    const fs::path annotations = proj / "tor_pet_labels.mips";
    REQUIRE(fs::exists(intensity));
    REQUIRE(fs::exists(provenance));
    REQUIRE(fs::exists(annotations));

    SUBCASE("correct emits the corrected stack and a threshold-stamped report") {
        const fs::path out = work_dir() / "corr";
        RunResult c = run_cli("correct --intensity " + intensity.string() + " --provenance " +
                              provenance.string() + " --annotations " + annotations.string() +
                              " --labels3d " + f.labels.string() + " --out " + out.string());
        REQUIRE(c.exit_code == 0);
        REQUIRE(fs::exists(out / "case_corrected.mips"));
        REQUIRE(fs::exists(out / "case_correction.csv"));
        const std::string report = slurp(out / "case_correction.csv");
        CHECK(report.find("# origin_threshold = 0.75\n") != std::string::npos);
        CHECK(report.find("# exclusion tumors_total = 1\n") != std::string::npos);

        // corrected output feeds straight into metrics
        const fs::path scores_dir = work_dir() / "corr_scores";
        RunResult m = run_cli("metrics --pred " + (out / "case_corrected.mips").string() +
                              " --truth " + annotations.string() + " --case-id tor --out " +
                              scores_dir.string());
        CHECK(m.exit_code == 0);
        CHECK(fs::exists(scores_dir / "scores.csv"));
    }

    SUBCASE("a looser origin threshold is echoed into the report") {
        const fs::path out = work_dir() / "corr_loose";
        RunResult c = run_cli("correct --intensity " + intensity.string() + " --provenance " +
                              provenance.string() + " --annotations " + annotations.string() +
                              " --labels3d " + f.labels.string() + " --origin-threshold 0.5" +
                              " --out " + out.string());
        REQUIRE(c.exit_code == 0);
        CHECK(slurp(out / "case_correction.csv").find("# origin_threshold = 0.5\n") !=
              std::string::npos);
    }

    SUBCASE("report-format text writes the structured variant") {
        const fs::path out = work_dir() / "corr_text";
        RunResult c = run_cli("correct --intensity " + intensity.string() + " --provenance " +
                              provenance.string() + " --annotations " + annotations.string() +
                              " --labels3d " + f.labels.string() + " --report-format text" +
                              " --out " + out.string());
        REQUIRE(c.exit_code == 0);
        CHECK(slurp(out / "case_correction.txt").rfind("report: corrections\n", 0) == 0);
    }

    SUBCASE("self-comparison scores are perfect at every angle") {
        const fs::path out = work_dir() / "scores_self";
        RunResult m = run_cli("metrics --pred " + annotations.string() + " --truth " +
                              annotations.string() + " --case-id self --out " + out.string());
        REQUIRE(m.exit_code == 0);
        const std::string text = slurp(out / "scores.csv");
        CHECK(text.find("self,0,1,1,0,0\n") != std::string::npos);
        CHECK(text.find("self,45,1,1,0,0\n") != std::string::npos);
        CHECK(text.find("self,90,1,1,0,0\n") != std::string::npos);
        CHECK(text.find("self,135,1,1,0,0\n") != std::string::npos);
        CHECK(text.find("# aggregate dice: mean = 1, std = 0, n = 1\n") != std::string::npos);
    }

    SUBCASE("an empty prediction leaves the distance fields blank") {
        // phantom with no spheres -> all-zero labels -> empty annotation stack
        const fs::path zdir = work_dir() / "zero";
        fs::create_directories(zdir);
        write_file(zdir / "zero.phantom", "nx = 32\nny = 32\nnz = 16\nbackground = 1.0\n");
        REQUIRE(run_cli("phantom " + (zdir / "zero.phantom").string() + " --out " +
                        zdir.string()).exit_code == 0);
        REQUIRE(run_cli("project " + (zdir / "zero_pet.nii.gz").string() + " --labels " +
                        (zdir / "zero_labels.nii.gz").string() + " --n 4 --interp nearest" +
                        " --out " + zdir.string()).exit_code == 0);

        const fs::path out = work_dir() / "scores_zero";
        RunResult m = run_cli("metrics --pred " + (zdir / "zero_pet_labels.mips").string() +
                              " --truth " + annotations.string() + " --case-id zero --out " +
                              out.string());
        REQUIRE(m.exit_code == 0);
        const std::string text = slurp(out / "scores.csv");
        CHECK(text.find("zero,0,0,0,,1\n") != std::string::npos);
        CHECK(text.find("# aggregate hausdorff") == std::string::npos);
    }

    SUBCASE("outputs are byte-identical across worker counts") {
        const fs::path w1 = work_dir() / "w1";
        const fs::path w4 = work_dir() / "w4";
        for (const auto& [dir, workers] : {std::pair{w1, "1"}, std::pair{w4, "4"}}) {
            RunResult p = run_cli("project " + f.pet.string() + " --labels " +
                                  f.labels.string() + " --n 6 --workers " + workers +
                                  " --out " + dir.string());
            REQUIRE(p.exit_code == 0);
            RunResult c = run_cli("correct --intensity " +
                                  (dir / "tor_pet_intensity.mips").string() + " --provenance " +
                                  (dir / "tor_pet_provenance.mips").string() +
                                  " --annotations " + (dir / "tor_pet_labels.mips").string() +
                                  " --labels3d " + f.labels.string() + " --workers " + workers +
                                  " --out " + dir.string());
            REQUIRE(c.exit_code == 0);
        }
        for (const char* name : {"tor_pet_intensity.mips", "tor_pet_provenance.mips",
                                 "tor_pet_labels.mips", "case_corrected.mips",
                                 "case_correction.csv"}) {
            CAPTURE(name);
            CHECK(file_bytes(w1 / name) == file_bytes(w4 / name));
        }
    }
}

TEST_CASE("batch manifests drive multiple cases") {
    Fixture& f = fixture();
    const fs::path dir = work_dir() / "batch";
    fs::create_directories(dir);
    write_file(dir / "cases.txt",
               "# id pet labels\n"
               "alpha " + f.pet.string() + " " + f.labels.string() + "\n"
               "beta " + f.pet.string() + "\n");
    RunResult r = run_cli("project --manifest " + (dir / "cases.txt").string() +
                          " --n 2 --interp nearest --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "alpha_intensity.mips"));
    CHECK(fs::exists(dir / "alpha_labels.mips"));
    CHECK(fs::exists(dir / "beta_intensity.mips"));
    CHECK_FALSE(fs::exists(dir / "beta_labels.mips"));

    SUBCASE("metrics manifests score each case") {
        write_file(dir / "pairs.txt",
                   "m1 " + (dir / "alpha_labels.mips").string() + " " +
                       (dir / "alpha_labels.mips").string() + "\n");
        RunResult m = run_cli("metrics --manifest " + (dir / "pairs.txt").string() + " --out " +
                              dir.string());
        REQUIRE(m.exit_code == 0);
        CHECK(slurp(dir / "scores.csv").find("m1,0,1,1,0,0\n") != std::string::npos);
    }

    SUBCASE("a malformed manifest line is rejected with its line number") {
        write_file(dir / "bad.txt", "only_id\n");
        RunResult m = run_cli("project --manifest " + (dir / "bad.txt").string() + " --out " +
                              dir.string());
        CHECK(m.exit_code == 1);
        CHECK(m.err.find("manifest line 1") != std::string::npos);
    }
}

TEST_CASE("sweep reports one row per angle count") {
    Fixture& f = fixture();
    const fs::path out = work_dir() / "sweep";
    RunResult r = run_cli("sweep " + f.pet.string() + " --labels " + f.labels.string() +
                          " --n 2,4 --interp nearest --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string text = slurp(out / "sweep.csv");
    CHECK(text.find("n,delta_theta,wall_ms,bytes,") != std::string::npos);
    CHECK(text.find("\n2,90,") != std::string::npos);
    CHECK(text.find("\n4,45,") != std::string::npos);

    SUBCASE("single-element list") {
        const fs::path single = work_dir() / "sweep_single";
        RunResult s = run_cli("sweep " + f.pet.string() + " --labels " + f.labels.string() +
                              " --n 8 --interp nearest --out " + single.string());
        REQUIRE(s.exit_code == 0);
        CHECK(slurp(single / "sweep.csv").find("\n8,22.5,") != std::string::npos);
    }

    SUBCASE("duplicate angle counts are refused") {
        RunResult s = run_cli("sweep " + f.pet.string() + " --labels " + f.labels.string() +
                              " --n 4,4 --out " + (work_dir() / "sweep_dup").string());
        CHECK(s.exit_code == 1);
        CHECK(s.err.find("duplicate") != std::string::npos);
    }
}

TEST_CASE("missing inputs exit with code 2 and name the path") {
    const fs::path out = work_dir() / "missing";
    RunResult r = run_cli("project /nonexistent/vol.nii --out " + out.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("missing input file: /nonexistent/vol.nii") != std::string::npos);

    Fixture& f = fixture();
    RunResult c = run_cli("correct --intensity /nope.mips --provenance /nope.mips" +
                          std::string(" --annotations /nope.mips --labels3d ") +
                          f.labels.string() + " --out " + out.string());
    CHECK(c.exit_code == 2);
    CHECK(c.err.find("missing input file: /nope.mips") != std::string::npos);
}

TEST_CASE("argument errors") {
    Fixture& f = fixture();

    SUBCASE("project without a volume or manifest") {
        RunResult r = run_cli("project --out " + (work_dir() / "noarg").string());
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("volume argument or --manifest") != std::string::npos);
    }

    SUBCASE("correct without its inputs") {
        RunResult r = run_cli("correct --out " + (work_dir() / "noarg").string());
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("--intensity") != std::string::npos);
    }

    SUBCASE("flag validation is left to the parser") {
        RunResult r = run_cli("project " + f.pet.string() + " --n 0 --out " +
                              (work_dir() / "noarg").string());
        CHECK(r.exit_code != 0);
    }

    SUBCASE("unknown subcommand") {
        CHECK(run_cli("frobnicate").exit_code != 0);
    }

    SUBCASE("out-of-range origin threshold fails the config check") {
        RunResult r = run_cli("correct --intensity x --provenance x --annotations x" +
                              std::string(" --labels3d x --origin-threshold 1.5 --out ") +
                              (work_dir() / "noarg").string());
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("origin_threshold") != std::string::npos);
    }
}

TEST_CASE("a failing case leaves no partial outputs") {
    Fixture& f = fixture();
    const fs::path proj = work_dir() / "proj_mismatch";
    REQUIRE(run_cli("project " + f.pet.string() + " --labels " + f.labels.string() +
                    " --n 2 --interp nearest --out " + proj.string()).exit_code == 0);

    // a smaller label volume cannot contain the provenance voxels
    const fs::path small = work_dir() / "small";
    fs::create_directories(small);
    write_file(small / "small.phantom", "nx = 16\nny = 16\nnz = 8\nbackground = 1.0\n");
    REQUIRE(run_cli("phantom " + (small / "small.phantom").string() + " --out " +
                    small.string()).exit_code == 0);

    const fs::path out = work_dir() / "corr_fail";
    RunResult c = run_cli("correct --intensity " + (proj / "tor_pet_intensity.mips").string() +
                          " --provenance " + (proj / "tor_pet_provenance.mips").string() +
                          " --annotations " + (proj / "tor_pet_labels.mips").string() +
                          " --labels3d " + (small / "small_labels.nii.gz").string() +
                          " --out " + out.string());
    CHECK(c.exit_code == 1);
    CHECK(c.err.find("provenance voxel outside the label volume") != std::string::npos);
    CHECK(regular_file_count(out) == 0);
}
