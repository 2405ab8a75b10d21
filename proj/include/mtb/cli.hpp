#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtb::cli {

struct Invocation {
    std::string command;  // generate | evaluate | analyze | transfer | history | report
    std::filesystem::path config;
    std::vector<std::string> overrides;
    std::optional<std::filesystem::path> out;
    bool dry_run = false;
    bool resume = false;
    std::optional<std::size_t> concurrency;
    std::optional<std::filesystem::path> seed_file;
    std::optional<std::size_t> limit;
    int verbosity = 0;
};

enum ExitCode : int { kOk = 0, kFailed = 1, kInvalid = 2 };

// Parses argv and executes; returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace mtb::cli
