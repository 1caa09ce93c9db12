#include "cli.hpp"
#include "commands.hpp"

#include <csignal>
#include <iostream>

namespace {

extern "C" void on_signal(int) { parley::cli::request_stop(); }

}  // namespace

int main(int argc, char** argv)
{
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::vector<std::string> args(argv + 1, argv + argc);
    return parley::cli::run(args, std::cin, std::cout, std::cerr);
}
