#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace multirank::cli {

/// Exit codes: 0 success, 1 validation error, 2 I/O error.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 1;
inline constexpr int kIo = 2;

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

/// Option tree with every subcommand; callbacks write to the given streams.
std::unique_ptr<CLI::App> make_app(Streams io);

/// Parses and runs one command line; args exclude the program name.
int run(const std::vector<std::string>& args, Streams io);

}  // namespace multirank::cli
