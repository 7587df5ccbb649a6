// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcdenoise/io.hpp"

#ifndef PCDN_CLI_PATH
#define PCDN_CLI_PATH ""
#endif

namespace {

const std::string kCli = PCDN_CLI_PATH;

int run_cli(const std::string& args, std::string* output = nullptr) {
    std::string out_file = "/tmp/pcdn_cli_out.txt";
    std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
    int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream is(out_file);
        std::ostringstream ss;
        ss << is.rdbuf();
        *output = ss.str();
    }
    return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli: generate is byte-reproducible under the same seed") {
    REQUIRE(!kCli.empty());
    std::filesystem::create_directories("/tmp/pcdn_cli");
    CHECK(run_cli("generate --shape sphere --n 500 --noise gaussian:0.02 --seed 7 "
                  "--out /tmp/pcdn_cli/a") == 0);
    CHECK(run_cli("generate --shape sphere --n 500 --noise gaussian:0.02 --seed 7 "
                  "--out /tmp/pcdn_cli/b") == 0);
    CHECK(read_file("/tmp/pcdn_cli/a_clean.xyz") == read_file("/tmp/pcdn_cli/b_clean.xyz"));
    CHECK(read_file("/tmp/pcdn_cli/a_noisy.xyz") == read_file("/tmp/pcdn_cli/b_noisy.xyz"));

    pcdn::KeyValues meta = pcdn::read_key_values("/tmp/pcdn_cli/a.meta");
    CHECK(meta.count("shape") == 1);
    CHECK(meta.count("noise") == 1);
}

TEST_CASE("cli: missing required flag is a usage error") {
    std::string out;
    CHECK(run_cli("generate --shape sphere", &out) == 1);
    CHECK(run_cli("denoise --in /tmp/nope.xyz", &out) == 1);
    CHECK(run_cli("", &out) == 1);
}

TEST_CASE("cli: unreadable input gives exit code 2") {
    std::string out;
    CHECK(run_cli("denoise --in /tmp/pcdn_missing.xyz --out /tmp/x.xyz "
                  "--oracle /tmp/pcdn_missing.xyz",
                  &out) == 2);
}

TEST_CASE("cli: generated xyz parses back to the same values") {
    CHECK(run_cli("generate --shape torus --n 300 --seed 9 --out /tmp/pcdn_cli/t") == 0);
    pcdn::PointCloud cloud = pcdn::read_xyz("/tmp/pcdn_cli/t_clean.xyz");
    CHECK(cloud.size() == 300);
    for (const pcdn::Vec3& p : cloud.points) {
        double q = std::sqrt(p.x * p.x + p.y * p.y) - 0.7;
        CHECK(std::abs(q * q + p.z * p.z - 0.09) < 1e-8);
    }
}

TEST_CASE("cli: schedule command reports tau_hat") {
    std::string out;
    CHECK(run_cli("schedule --sigma 0", &out) == 0);
    CHECK(out.find("tau_hat = 0") != std::string::npos);
    CHECK(out.find("iterations = 0") != std::string::npos);

    // Anything at or above sigma_bar_T maps to the last timestep.
    CHECK(run_cli("schedule --sigma 0.032", &out) == 0);
    CHECK(out.find("tau_hat = 1000") != std::string::npos);

    CHECK(run_cli("schedule --dump /tmp/pcdn_cli/table.txt --sigma 0.01", &out) == 0);
    std::string table = read_file("/tmp/pcdn_cli/table.txt");
    CHECK(table.find("# t beta alpha_bar sigma_bar_sq") != std::string::npos);
}

TEST_CASE("cli: full pipeline is deterministic end to end") {
    REQUIRE(run_cli("generate --shape sphere --n 2000 --noise gaussian:0.02 --seed 11 "
                    "--out /tmp/pcdn_cli/p") == 0);

    std::string denoise_args =
        "denoise --in /tmp/pcdn_cli/p_noisy.xyz --oracle /tmp/pcdn_cli/p_clean.xyz "
        "--patch-size 500 --seed 3 ";
    REQUIRE(run_cli(denoise_args + "--out /tmp/pcdn_cli/d1.xyz --jobs 1") == 0);
    REQUIRE(run_cli(denoise_args + "--out /tmp/pcdn_cli/d2.xyz --jobs 4") == 0);
    CHECK(read_file("/tmp/pcdn_cli/d1.xyz") == read_file("/tmp/pcdn_cli/d2.xyz"));

    std::string eval_args =
        "eval --in /tmp/pcdn_cli/d1.xyz --ref /tmp/pcdn_cli/p_clean.xyz --shape sphere "
        "--report /tmp/pcdn_cli/d1.xyz.report --csv /tmp/pcdn_cli/e1.csv";
    std::string ev1, ev2;
    REQUIRE(run_cli(eval_args, &ev1) == 0);
    REQUIRE(run_cli(eval_args, &ev2) == 0);

    // Reports repeat exactly except for wall time.
    auto strip_wall = [](const std::string& s) { return s.substr(0, s.find("wall_time")); };
    CHECK(strip_wall(ev1) == strip_wall(ev2));
    CHECK(ev1.find("chamfer") != std::string::npos);
    CHECK(ev1.find("tau_hat") != std::string::npos);

    std::string csv = read_file("/tmp/pcdn_cli/e1.csv");
    CHECK(csv.find("chamfer,p2s_mean,sigma_estimated,tau_hat,wall_time") != std::string::npos);
}

TEST_CASE("cli: config file provides defaults and flags win") {
    {
        std::ofstream os("/tmp/pcdn_cli/gen.cfg");
        os << "[generate]\nshape = cube\nn = 123\nseed = 5\nout = /tmp/pcdn_cli/cfg\n";
    }
    REQUIRE(run_cli("--config /tmp/pcdn_cli/gen.cfg generate") == 0);
    CHECK(pcdn::read_xyz("/tmp/pcdn_cli/cfg_clean.xyz").size() == 123);

    REQUIRE(run_cli("--config /tmp/pcdn_cli/gen.cfg generate --n 55") == 0);
    CHECK(pcdn::read_xyz("/tmp/pcdn_cli/cfg_clean.xyz").size() == 55);
}
