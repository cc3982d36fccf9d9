#pragma once

// On-disk corpora and a subprocess runner for the command-line tests.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "labelqa/fileio.hpp"
#include "labelqa/nifti.hpp"
#include "labelqa/volume.hpp"

namespace labelqa::testing {

namespace fs = std::filesystem;

/// Fresh empty directory, unique per process and name.
inline fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("labelqa_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// One directory per member: <root>/<model_id>/<case>_organ<c>.nii.gz.
inline std::vector<fs::path> write_model_dirs(const fs::path& root, const std::vector<PredictionSet>& cases) {
    std::vector<fs::path> dirs;
    for (const auto& set : cases) {
        for (std::size_t m = 0; m < set.member_count(); ++m) {
            const auto& member = set.members()[m];
            const fs::path dir = root / member.model_id();
            if (dirs.size() <= m) {
                fs::create_directories(dir);
                dirs.push_back(dir);
            }
            for (std::size_t c = 0; c < member.channel_count(); ++c) {
                nifti::write_volume(member.channels()[c],
                                    dir / (set.case_id() + "_organ" + std::to_string(c + 1) + ".nii.gz"), true);
            }
        }
    }
    return dirs;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') {
            q += "'\\''";
        } else {
            q += c;
        }
    }
    return q + "'";
}

/// Runs the labelqa binary with `args`, capturing stdout and stderr.
inline CliResult run_cli(const std::vector<std::string>& args) {
    static int counter = 0;
    const fs::path base = fs::temp_directory_path() /
                          ("labelqa_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::string cmd = shell_quote(LABELQA_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " > " + shell_quote(base.string() + ".out") + " 2> " + shell_quote(base.string() + ".err");
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file_text(base.string() + ".out");
    r.err = read_file_text(base.string() + ".err");
    fs::remove(base.string() + ".out");
    fs::remove(base.string() + ".err");
    return r;
}

/// Byte content of every regular file under `dir`, keyed by relative path.
inline std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file_bytes(e.path());
    }
    return out;
}

}  // namespace labelqa::testing
